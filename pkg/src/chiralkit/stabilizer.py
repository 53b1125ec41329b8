"""Stabilizer-state machinery over GF(2): symplectic tableaux, the linear
system whose solutions conjugate a stabilizer state onto its complex
conjugate, nullity and fidelity monotones, and the chirality-vs-magic bound
checks.

Conventions: a phase-free Pauli string is a pair of bit-vectors (z, x) with
site encoding (0,0)=I, (0,1)=X, (1,0)=Z, (1,1)=Y. A stabilizer group is a
k x 2n GF(2) matrix [M_Z | M_X] with a +/- sign per row; rows must be
independent and mutually commuting under the symplectic form.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import _pauli
from .chirality import pauli_log_distance_detail, pure_state_log_distance
from .qmat import DensityMatrix


# ---------------------------------------------------------------------------
# GF(2) linear algebra on bit-packed rows (one python int per row)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class F2System:
    """Linear system M v = b over GF(2); rows bit-packed (bit c = column c)."""

    rows: tuple[int, ...]
    rhs: tuple[int, ...]
    ncols: int

    def __post_init__(self):
        if len(self.rows) != len(self.rhs):
            raise ValueError("one right-hand-side bit per row required")
        if any(r < 0 or r >> self.ncols for r in self.rows):
            raise ValueError("row bits outside the declared number of columns")
        if any(b not in (0, 1) for b in self.rhs):
            raise ValueError("right-hand side must be bits")


@dataclass(frozen=True)
class F2Solution:
    feasible: bool
    solution: int | None
    nullspace: tuple[int, ...]
    rank: int
    ncols: int

    def all_solutions(self):
        """Iterate the full affine solution set (2^dim(nullspace) vectors)."""
        if not self.feasible:
            return
        for picks in itertools.product((0, 1), repeat=len(self.nullspace)):
            v = self.solution
            for take, basis in zip(picks, self.nullspace):
                if take:
                    v ^= basis
            yield v


def f2_solve(system: F2System) -> F2Solution:
    """Gaussian elimination to reduced row echelon form.

    Returns one particular solution (free variables set to 0) plus a basis of
    the nullspace, or an infeasible marker when a zero row meets rhs 1. For
    rows that are linearly independent a solution always exists.
    """
    ncols = system.ncols
    rows = list(system.rows)
    rhs = list(system.rhs)
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        hit = next((i for i in range(r, len(rows)) if (rows[i] >> col) & 1), None)
        if hit is None:
            continue
        rows[r], rows[hit] = rows[hit], rows[r]
        rhs[r], rhs[hit] = rhs[hit], rhs[r]
        for i in range(len(rows)):
            if i != r and (rows[i] >> col) & 1:
                rows[i] ^= rows[r]
                rhs[i] ^= rhs[r]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    rank = r
    if any(rows[i] == 0 and rhs[i] for i in range(rank, len(rows))):
        return F2Solution(False, None, (), rank, ncols)
    solution = 0
    for i, col in enumerate(pivots):
        if rhs[i]:
            solution |= 1 << col
    free_cols = [c for c in range(ncols) if c not in pivots]
    nullspace = []
    for f in free_cols:
        v = 1 << f
        for i, col in enumerate(pivots):
            if (rows[i] >> f) & 1:
                v |= 1 << col
        nullspace.append(v)
    return F2Solution(True, solution, tuple(nullspace), rank, ncols)


def f2_rank(rows, ncols: int) -> int:
    return f2_solve(F2System(tuple(rows), (0,) * len(rows), ncols)).rank


# ---------------------------------------------------------------------------
# Pauli strings and stabilizer groups
# ---------------------------------------------------------------------------

_SITE_CHARS = {(0, 0): "I", (0, 1): "X", (1, 0): "Z", (1, 1): "Y"}
_CHAR_SITES = {v: k for k, v in _SITE_CHARS.items()}


@dataclass(frozen=True)
class PauliString:
    """Phase-free Pauli string as per-qubit (z, x) bits, qubit 0 first."""

    z_bits: tuple[int, ...]
    x_bits: tuple[int, ...]

    def __post_init__(self):
        if len(self.z_bits) != len(self.x_bits):
            raise ValueError("z and x bit-vectors must have equal length")
        if any(b not in (0, 1) for b in self.z_bits + self.x_bits):
            raise ValueError("bit-vectors must contain bits")

    @property
    def n(self) -> int:
        return len(self.z_bits)

    @property
    def label(self) -> str:
        return "".join(_SITE_CHARS[zx] for zx in zip(self.z_bits, self.x_bits))

    def basis_masks(self) -> tuple[int, int]:
        """(z, x) packed with qubit 0 as the most significant bit, matching
        the computational-basis index convention of dense state vectors."""
        n = self.n
        z = sum(b << (n - 1 - j) for j, b in enumerate(self.z_bits))
        x = sum(b << (n - 1 - j) for j, b in enumerate(self.x_bits))
        return z, x

    def matrix(self) -> np.ndarray:
        z, x = self.basis_masks()
        return _pauli.pauli_matrix(z, x, self.n)

    def factors(self) -> list[np.ndarray]:
        z, x = self.basis_masks()
        return _pauli.single_qubit_factors(z, x, self.n)

    @staticmethod
    def from_label(label: str) -> "PauliString":
        try:
            sites = [_CHAR_SITES[c] for c in label.upper()]
        except KeyError as exc:
            raise ValueError(f"invalid Pauli character in {label!r}") from exc
        return PauliString(tuple(s[0] for s in sites), tuple(s[1] for s in sites))


def _commute(zi, xi, zj, xj) -> bool:
    return ((zi & xj).bit_count() + (xi & zj).bit_count()) % 2 == 0


@dataclass(frozen=True)
class StabilizerGroup:
    """k independent, mutually commuting signed Pauli generators on n qubits.

    z_rows/x_rows are bit-packed with bit j = qubit j; signs holds one bit per
    generator (0 for +, 1 for -).
    """

    n: int
    z_rows: tuple[int, ...]
    x_rows: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        k, n = self.k, self.n
        if len(self.x_rows) != k or len(self.signs) != k:
            raise ValueError("z_rows, x_rows and signs must have equal length")
        if k > n:
            raise ValueError(f"{k} generators on {n} qubits cannot be independent")
        if any(r < 0 or r >> n for r in self.z_rows + self.x_rows):
            raise ValueError("generator bits outside the qubit range")
        for i in range(k):
            for j in range(i + 1, k):
                if not _commute(self.z_rows[i], self.x_rows[i], self.z_rows[j], self.x_rows[j]):
                    raise ValueError(f"generators {i} and {j} anticommute")
        rows = [self.z_rows[i] | (self.x_rows[i] << n) for i in range(k)]
        if f2_rank(rows, 2 * n) != k:
            raise ValueError("generator rows are linearly dependent over GF(2)")

    @property
    def k(self) -> int:
        return len(self.z_rows)

    def generator(self, i: int) -> PauliString:
        z = tuple((self.z_rows[i] >> j) & 1 for j in range(self.n))
        x = tuple((self.x_rows[i] >> j) & 1 for j in range(self.n))
        return PauliString(z, x)

    def to_tableau(self) -> str:
        lines = []
        for i in range(self.k):
            sign = "-" if self.signs[i] else "+"
            lines.append(sign + self.generator(i).label)
        return "\n".join(lines)


def group_from_labels(labels, signs=None, n: int | None = None) -> StabilizerGroup:
    paulis = [PauliString.from_label(lbl) for lbl in labels]
    if n is None:
        n = paulis[0].n if paulis else 0
    if any(p.n != n for p in paulis):
        raise ValueError("generator labels have inconsistent lengths")
    z_rows = tuple(sum(b << j for j, b in enumerate(p.z_bits)) for p in paulis)
    x_rows = tuple(sum(b << j for j, b in enumerate(p.x_bits)) for p in paulis)
    signs = tuple(int(s) for s in (signs or (0,) * len(paulis)))
    return StabilizerGroup(n, z_rows, x_rows, signs)


def parse_tableau(text: str, n: int | None = None) -> StabilizerGroup:
    """Parse the tableau text format: one generator per line, characters
    I/X/Y/Z with an optional leading + or - (ASCII or U+2212) sign."""
    labels, signs = [], []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        sign = 0
        if line[0] in "+-−":
            sign = 0 if line[0] == "+" else 1
            line = line[1:].strip()
        if not line:
            raise ValueError(f"sign without generator in line {raw!r}")
        labels.append(line)
        signs.append(sign)
    if not labels and n is None:
        raise ValueError("empty tableau and no qubit count given")
    return group_from_labels(labels, signs, n=n if labels == [] else None)


def stabilizer_state(group: StabilizerGroup) -> DensityMatrix:
    """Dense state 2^{k-n} prod_i (I + s_i P_i)/2 stabilized by the group."""
    n = group.n
    dim = 1 << n
    acc = np.eye(dim, dtype=complex)
    for i in range(group.k):
        p = group.generator(i).matrix()
        if group.signs[i]:
            p = -p
        acc = acc @ (np.eye(dim) + p) / 2.0
    acc /= 2 ** (n - group.k)
    return DensityMatrix((2,) * n, acc, atol=1e-9)


@dataclass(frozen=True)
class ConjugationSolutions:
    """Affine set of Pauli strings conjugating the stabilizer state onto its
    complex conjugate: base solution plus the nullspace of [M_Z | M_X]."""

    base: PauliString
    nullspace_basis: tuple[PauliString, ...]

    @property
    def count(self) -> int:
        return 1 << len(self.nullspace_basis)

    def __iter__(self):
        n = self.base.n
        for picks in itertools.product((0, 1), repeat=len(self.nullspace_basis)):
            z = list(self.base.z_bits)
            x = list(self.base.x_bits)
            for take, basis in zip(picks, self.nullspace_basis):
                if take:
                    z = [a ^ b for a, b in zip(z, basis.z_bits)]
                    x = [a ^ b for a, b in zip(x, basis.x_bits)]
            yield PauliString(tuple(z), tuple(x))


def _conjugation_system(group: StabilizerGroup) -> F2System:
    # unknowns stacked as [v_X | v_Z]: columns 0..n-1 take M_Z, n..2n-1 take M_X
    n = group.n
    rows = tuple(group.z_rows[i] | (group.x_rows[i] << n) for i in range(group.k))
    rhs = tuple((group.z_rows[i] & group.x_rows[i]).bit_count() % 2 for i in range(group.k))
    return F2System(rows, rhs, 2 * n)


def conjugation_pauli_set(group: StabilizerGroup) -> ConjugationSolutions:
    """Solve [M_Z M_X][v_X; v_Z] = diag(M_Z M_X^T) over GF(2).

    Any solution, read as a Pauli string via the (v_Z, v_X) site encoding,
    anticommutes with exactly the generators containing an odd number of Y
    sites, hence conjugates the stabilizer state onto its complex conjugate.
    Row independence guarantees feasibility."""
    sol = f2_solve(_conjugation_system(group))
    if not sol.feasible:  # cannot happen for a valid group
        raise AssertionError("conjugation system infeasible for independent generators")
    n = group.n

    def to_pauli(v: int) -> PauliString:
        vx, vz = v & ((1 << n) - 1), v >> n
        return PauliString(
            tuple((vz >> j) & 1 for j in range(n)),
            tuple((vx >> j) & 1 for j in range(n)),
        )

    return ConjugationSolutions(to_pauli(sol.solution), tuple(to_pauli(b) for b in sol.nullspace))


def conjugation_pauli(group: StabilizerGroup) -> PauliString:
    return conjugation_pauli_set(group).base


# ---------------------------------------------------------------------------
# Magic monotones for pure states
# ---------------------------------------------------------------------------

PAULI_ENUM_MAX_QUBITS = 7
FIDELITY_ENUM_MAX_QUBITS = 4


def stabilizer_nullity(psi: np.ndarray, n: int, tol: float = 1e-8) -> int:
    """n - log2 of the number of phase-free strings with |<psi|P|psi>| = 1.

    The definite strings form a group, so the count must be a power of two;
    a non-power count means the tolerance sliced through borderline
    expectations and is reported as an error."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != 1 << n:
        raise ValueError(f"state dimension {psi.size} is not 2^{n}")
    if n > PAULI_ENUM_MAX_QUBITS:
        raise ValueError(f"enumeration of 4^{n} strings refused (max {PAULI_ENUM_MAX_QUBITS})")
    table = np.abs(_pauli.pauli_expectations(psi))
    count = int(np.sum(table > 1.0 - tol))
    k = count.bit_length() - 1
    if count != 1 << k:
        raise ValueError(
            f"{count} strings have |expectation| within {tol:.1e} of 1; "
            "not a power of two, so the tolerance split a borderline group"
        )
    return n - k


@lru_cache(maxsize=None)
def _maximal_isotropic_tableaux(n: int) -> tuple[tuple[int, ...], ...]:
    """All rank-n reduced-row-echelon n x 2n GF(2) matrices whose rows
    mutually commute under the symplectic form (one canonical tableau per
    maximal stabilizer group). Rows are returned bit-packed [z | x << n]."""
    ncols = 2 * n
    out = []
    for pivots in itertools.combinations(range(ncols), n):
        free_pos = [
            (i, j)
            for i in range(n)
            for j in range(pivots[i] + 1, ncols)
            if j not in pivots
        ]
        nfree = len(free_pos)
        count = 1 << nfree
        mats = np.zeros((count, n, ncols), dtype=np.uint8)
        for i, c in enumerate(pivots):
            mats[:, i, c] = 1
        assignments = np.arange(count, dtype=np.uint64)
        for b, (i, j) in enumerate(free_pos):
            mats[:, i, j] = (assignments >> np.uint64(b)) & np.uint64(1)
        mz = mats[:, :, :n].astype(np.int16)
        mx = mats[:, :, n:].astype(np.int16)
        sym = (mz @ mx.transpose(0, 2, 1) + mx @ mz.transpose(0, 2, 1)) % 2
        good = ~np.any(sym, axis=(1, 2))
        weights = (np.uint64(1) << np.arange(ncols, dtype=np.uint64))
        packed = (mats[good].astype(np.uint64) * weights).sum(axis=2)
        out.extend(tuple(int(v) for v in row) for row in packed)
    return tuple(out)


@lru_cache(maxsize=None)
def pure_stabilizer_states(n: int) -> np.ndarray:
    """All pure stabilizer state vectors on n qubits, one per row.

    Built from every canonical maximal tableau with every sign pattern: the
    n commuting generators are simultaneously diagonalized by one Hermitian
    eigendecomposition of sum_i 3^i P_i (eigenvalues sum_i +-3^i are all
    distinct), whose eigenvectors are exactly the 2^n sign-pattern states.
    Deduplicated by a fingerprint of the rounded projector as a safety net;
    canonical tableaux should already be duplicate-free."""
    if n > FIDELITY_ENUM_MAX_QUBITS:
        raise ValueError(
            f"stabilizer-state enumeration grows like 2^(n^2/2); max {FIDELITY_ENUM_MAX_QUBITS} "
            "qubits supported. Use stabilizer_nullity or the Pauli-restricted "
            "log-distance for larger systems."
        )
    dim = 1 << n
    mask = (1 << n) - 1
    seen: dict[bytes, np.ndarray] = {}
    for rows in _maximal_isotropic_tableaux(n):
        m = np.zeros((dim, dim), dtype=complex)
        for i, row in enumerate(rows):
            z_lsb, x_lsb = row & mask, row >> n
            # repack to the basis-index (qubit 0 = MSB) convention
            z = sum(((z_lsb >> j) & 1) << (n - 1 - j) for j in range(n))
            x = sum(((x_lsb >> j) & 1) << (n - 1 - j) for j in range(n))
            m += (3**i) * _pauli.pauli_matrix(z, x, n)
        _, vecs = np.linalg.eigh(m)
        for col in range(dim):
            v = vecs[:, col]
            proj = np.outer(v, v.conj())
            key = np.round(proj, 8).tobytes()
            seen.setdefault(key, v)
    return np.array(list(seen.values()))


def stabilizer_fidelity(psi: np.ndarray, n: int) -> float:
    """Maximal squared overlap of psi with any pure stabilizer state."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    if psi.size != 1 << n:
        raise ValueError(f"state dimension {psi.size} is not 2^{n}")
    states = pure_stabilizer_states(n)
    return float(np.max(np.abs(states.conj() @ psi) ** 2))


# ---------------------------------------------------------------------------
# Chirality lower-bounds magic
# ---------------------------------------------------------------------------


class MagicBoundViolation(AssertionError):
    """The chirality-magic inequality chain failed beyond tolerance."""


@dataclass(frozen=True)
class MagicBoundsReport:
    log_distance: float
    pauli_log_distance: float
    nullity: int
    stabilizer_fid: float
    minus_two_log_fidelity: float
    tolerance: float

    @property
    def chain(self) -> tuple[float, float, float, float]:
        return (
            self.log_distance,
            self.pauli_log_distance,
            float(self.nullity),
            self.minus_two_log_fidelity,
        )


def verify_magic_bounds(
    psi: np.ndarray,
    n: int,
    restarts: int = 20,
    seed: int = 0,
    tolerance: float = 1e-7,
) -> MagicBoundsReport:
    """Check C <= C_P <= nullity and C_P <= -2 log F on a pure n-qubit state.

    C is estimated with one restart warm-started from the Pauli string that
    achieves C_P (so the reported C never exceeds C_P by optimizer stall),
    plus identity and Haar restarts."""
    psi = np.asarray(psi, dtype=complex).reshape(-1)
    psi = psi / np.linalg.norm(psi)
    c_p, (z, x) = pauli_log_distance_detail(psi, n)
    warm = _pauli.single_qubit_factors(z, x, n)
    c, _ = pure_state_log_distance(
        psi, (2,) * n, restarts=restarts, seed=seed, extra_inits=[warm]
    )
    nullity = stabilizer_nullity(psi, n)
    fid = stabilizer_fidelity(psi, n)
    minus2logf = -2.0 * float(np.log(max(fid, 1e-300)))
    report = MagicBoundsReport(c, c_p, nullity, fid, minus2logf, tolerance)
    checks = [
        ("C <= C_P", c, c_p),
        ("C_P <= nullity", c_p, float(nullity)),
        ("C_P <= -2 log F", c_p, minus2logf),
    ]
    for name, lo, hi in checks:
        if lo > hi + tolerance:
            raise MagicBoundViolation(
                f"{name} violated: {lo!r} > {hi!r} + {tolerance:g}; report={report!r}"
            )
    return report


# ---------------------------------------------------------------------------
# Random groups for property tests
# ---------------------------------------------------------------------------


def random_stabilizer_group(
    n: int, rng: np.random.Generator, k: int | None = None
) -> StabilizerGroup:
    """Uniform-ish random group: rejection-sample commuting independent rows
    and random signs. k defaults to a random size in 0..n."""
    if k is None:
        k = int(rng.integers(0, n + 1))
    z_rows: list[int] = []
    x_rows: list[int] = []
    while len(z_rows) < k:
        z = int(rng.integers(0, 1 << n))
        x = int(rng.integers(0, 1 << n))
        if z == 0 and x == 0:
            continue
        if not all(_commute(z, x, zi, xi) for zi, xi in zip(z_rows, x_rows)):
            continue
        rows = [zi | (xi << n) for zi, xi in zip(z_rows, x_rows)] + [z | (x << n)]
        if f2_rank(rows, 2 * n) != len(rows):
            continue
        z_rows.append(z)
        x_rows.append(x)
    signs = tuple(int(b) for b in rng.integers(0, 2, size=k))
    return StabilizerGroup(n, tuple(z_rows), tuple(x_rows), signs)


def random_stabilizer_vector(n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random pure stabilizer state from the cached enumeration."""
    states = pure_stabilizer_states(n)
    return states[int(rng.integers(0, len(states)))]
