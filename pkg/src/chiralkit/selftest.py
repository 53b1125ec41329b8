"""Acceptance suite: every exit criterion of the build, runnable both from
pytest and from the command line (`chiralkit selftest`).

Each criterion is a callable returning (passed, detail). Tolerances and
sample counts are pinned here, not configurable; seeds are fixed so every
run checks the same states.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import chirality as ch
from . import correlations as co
from . import experiments as ex
from . import stabilizer as st
from .qmat import (
    DensityMatrix,
    bipartition,
    conjugate,
    embed_operator,
    matrix_log_on_support,
    partial_trace,
    pure_state_density,
    tensor_product,
)
from .sampling import (
    haar_unitary,
    random_mixed_state,
    random_pure_state,
    random_two_qubit_maximally_mixed,
    split_rng,
)
from .states import chiral_qutrit_qubit, commuting_chiral_qudit_qubit, t_state_vector

SPLIT = bipartition([0], [1])


@dataclass
class CriterionResult:
    key: str
    title: str
    passed: bool
    detail: str
    seconds: float


def _sample_pair(seed: int, i: int) -> tuple[DensityMatrix, DensityMatrix]:
    rng = split_rng(seed, i)
    return random_mixed_state((2, 2), rng), random_mixed_state((2, 2), rng)


def criterion_1_stabilizer_nonchirality():
    """200 random stabilizer states (mixed and pure, n <= 4): the solved
    conjugation Pauli maps the state exactly onto its conjugate."""
    worst = 0.0
    for i in range(200):
        rng = split_rng(101, i)
        n = int(rng.integers(1, 5))
        group = st.random_stabilizer_group(n, rng)
        rho = st.stabilizer_state(group)
        q = st.conjugation_pauli(group).matrix()
        err = float(np.linalg.norm(q @ rho.data @ q.conj().T - rho.data.conj()))
        worst = max(worst, err)
    return worst < 1e-10, f"worst ||Q rho Q+ - conj(rho)||_F = {worst:.2e} (tol 1e-10)"


def criterion_2_magic_bounds():
    """C <= C_P <= nullity and C_P <= -2 log F (tol 1e-7) on 500 Haar pure
    states at 2 and 3 qubits; all four vanish on 50 random stabilizer states."""
    tol = 1e-7
    worst_gap = -np.inf
    for i in range(500):
        n = 2 if i % 2 == 0 else 3
        rng = split_rng(202, i)
        psi = random_pure_state(1 << n, rng)
        rep = st.verify_magic_bounds(psi, n, restarts=20, seed=1_000_000 + i, tolerance=tol)
        worst_gap = max(
            worst_gap,
            rep.log_distance - rep.pauli_log_distance,
            rep.pauli_log_distance - rep.nullity,
            rep.pauli_log_distance - rep.minus_two_log_fidelity,
        )
    worst_stab = 0.0
    for i in range(50):
        rng = split_rng(203, i)
        n = 2 if i % 2 == 0 else 3
        psi = st.random_stabilizer_vector(n, rng)
        rep = st.verify_magic_bounds(psi, n, restarts=20, seed=2_000_000 + i, tolerance=tol)
        worst_stab = max(worst_stab, max(abs(v) for v in rep.chain))
    ok = worst_gap <= tol and worst_stab <= tol
    return ok, (
        f"500 Haar states: worst inequality excess {worst_gap:.2e} (tol {tol:g}); "
        f"50 stabilizer states: largest |measure| {worst_stab:.2e}"
    )


def criterion_3_t_state_benchmarks():
    """Nullity, stabilizer fidelity and Pauli log-distance of the T state."""
    t = t_state_vector()
    nu = st.stabilizer_nullity(t, 1)
    fid = st.stabilizer_fidelity(t, 1)
    fid_err = abs(fid - np.cos(np.pi / 8) ** 2)
    cps = []
    psi = np.array([1.0], dtype=complex)
    for k in (1, 2, 3):
        psi = np.kron(psi, t)
        cps.append(ch.pauli_log_distance(psi, k))
    ok = nu == 1 and fid_err < 1e-9 and max(cps) < 1e-9
    return ok, (
        f"nullity={nu} (want 1); |F - cos^2(pi/8)| = {fid_err:.2e} (tol 1e-9); "
        f"C_P(T tensor k) = {['%.1e' % c for c in cps]} (tol 1e-9)"
    )


_MEASURES = {
    "J2": lambda rho, split: ch.j2(rho, split),
    "J3": lambda rho, split: ch.j3(rho, split),
    "J3_prime": lambda rho, split: ch.j3_prime(rho, split),
    "gamma_0.7": lambda rho, split: ch.gamma_s(rho, split, 0.7),
    "phi_0.7": lambda rho, split: ch.phi_s(rho, split, 0.7),
    "gamma": lambda rho, split: ch.gamma_integral(rho, split),
}


def criterion_4_additivity_oddness_lu():
    """Additivity (tol 1e-8), oddness (1e-9) and local-unitary invariance
    (1e-9) of all six nested-commutator measures on 100 random pairs."""
    composite = bipartition([0, 2], [1, 3])
    worst = {"add": 0.0, "odd": 0.0, "lu": 0.0}
    for i in range(100):
        rho, sig = _sample_pair(404, i)
        rng = split_rng(405, i)
        u_local = np.kron(haar_unitary(2, rng), haar_unitary(2, rng))
        rot = DensityMatrix((2, 2), u_local @ rho.data @ u_local.conj().T)
        prod = tensor_product(rho, sig)
        for name, fn in _MEASURES.items():
            v_rho = fn(rho, SPLIT)
            worst["add"] = max(worst["add"], abs(fn(prod, composite) - v_rho - fn(sig, SPLIT)))
            worst["odd"] = max(worst["odd"], abs(fn(conjugate(rho), SPLIT) + v_rho))
            worst["lu"] = max(worst["lu"], abs(fn(rot, SPLIT) - v_rho))
    ok = worst["add"] < 1e-8 and worst["odd"] < 1e-9 and worst["lu"] < 1e-9
    return ok, (
        f"worst residuals over 100 pairs x 6 measures: additivity {worst['add']:.2e} "
        f"(tol 1e-8), oddness {worst['odd']:.2e} (1e-9), LU invariance {worst['lu']:.2e} (1e-9)"
    )


def criterion_5_derivative_relations():
    """Central differences of gamma_s and phi_s at s=0 (step 1e-3) against
    -J3 and -J2 on 50 random states: within 1e-5 relative, with a 1e-6
    absolute floor for targets at the rounding scale (see decisions ledger)."""
    rtol, atol = 1e-5, 1e-6
    worst = 0.0
    for i in range(50):
        rng = split_rng(505, i)
        rho = random_mixed_state((2, 2), rng)
        j2v, j3v = ch.j2(rho, SPLIT), ch.j3(rho, SPLIT)
        eg = abs(ch.gamma_s_second_difference(rho, SPLIT, 1e-3) + j3v)
        ep = abs(ch.phi_s_first_difference(rho, SPLIT, 1e-3) + j2v)
        worst = max(worst, eg - rtol * abs(j3v), ep - rtol * abs(j2v))
    return worst <= atol, (
        f"worst |difference - target| beyond {rtol:g}|target| is {worst:.2e} "
        f"(absolute floor {atol:g})"
    )


def criterion_6_gamma_qfi_bound():
    """Both intrinsic-IP bounds and the dimension-capped form on 1000 random
    full-rank two-qubit states, slack >= -1e-8."""
    worst = np.inf
    for i in range(1000):
        rng = split_rng(606, i)
        rho = random_mixed_state((2, 2), rng)
        rep = co.check_gamma_qfi_bound(rho, SPLIT, tolerance=1e-8)
        worst = min(worst, rep.slack_a, rep.slack_b, rep.slack_bound_a, rep.slack_bound_b)
    return worst >= -1e-8, f"minimum slack over 1000 states = {worst:.3e} (tol -1e-8)"


def criterion_7_sld_integral_identity():
    """Quadrature and eigenbasis forms of the SLD superoperator agree to 1e-6
    Frobenius on 100 random full-rank states of dims (2,2) and (2,3).
    Full rank is enforced by resampling until the smallest eigenvalue
    exceeds 1e-3, keeping the pinned s_max=8 truncation well under 1e-6."""
    worst = 0.0
    for i in range(100):
        dims = (2, 2) if i % 2 == 0 else (2, 3)
        rng = split_rng(707, i)
        while True:
            rho = random_mixed_state(dims, rng)
            if rho.eigenvalues()[0] > 1e-3:
                break
        d = rho.dim
        op = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        op = 0.5 * (op + op.conj().T)
        op /= np.linalg.norm(op)
        err = np.linalg.norm(co.sld_integral_form(rho, op) - co.sld_apply(rho, op))
        worst = max(worst, float(err))
    return worst < 1e-6, f"worst Frobenius mismatch = {worst:.2e} (tol 1e-6)"


def criterion_8_simplex_entropy_max():
    """Projected-gradient maximum of sum x (log x)^2 matches 0.563 (d=2) and
    (log d)^2 (d=3..8) within 1e-3."""
    errs = {}
    for d in range(2, 9):
        target = 0.563 if d == 2 else float(np.log(d) ** 2)
        errs[d] = abs(co.simplex_entropy_max(d, starts=100, iters=2000, seed=808) - target)
    worst = max(errs.values())
    return worst < 1e-3, (
        "max |value - target| over d=2..8 = "
        + f"{worst:.2e} (tol 1e-3); per d: "
        + ", ".join(f"{d}:{e:.1e}" for d, e in errs.items())
    )


def criterion_9_chiral_example():
    """The qutrit-qubit block state with weights (0.5, 0.3, 0.2): chirality
    witnessed by the orbit optimizer, while every flow measure and the
    intrinsic IP vanish."""
    rho = chiral_qutrit_qubit((0.5, 0.3, 0.2))
    val, res = ch.chiral_log_distance(rho, SPLIT, restarts=50, seed=909)
    fid_ok = res.best_fidelity <= 1.0 - 1e-3
    j2v = abs(ch.j2(rho, SPLIT))
    j3v = abs(ch.j3(rho, SPLIT))
    # gamma needs full rank; the state is rank 3 of 6, so regularize by an
    # epsilon of maximal mixing, which preserves the block structure
    eps = 1e-6
    reg = DensityMatrix(rho.dims, (1 - eps) * rho.data + eps * np.eye(6) / 6.0)
    gv = abs(ch.gamma_integral(reg, SPLIT))
    fa = abs(co.intrinsic_ip(rho, SPLIT, "A"))
    zeros_ok = max(j2v, j3v, gv, fa) < 1e-9
    return fid_ok and zeros_ok, (
        f"best fidelity over 50 restarts = {res.best_fidelity:.6f} (need <= 1-1e-3); "
        f"|J2|={j2v:.1e}, |J3|={j3v:.1e}, |gamma|={gv:.1e} (eps-regularized), "
        f"F^A={fa:.1e} (all tol 1e-9)"
    )


def criterion_10_commuting_chiral_example():
    """The 4-level x qubit state that commutes with both marginals: all
    nested-commutator measures blind (1e-9), yet the optimizer certifies
    chirality (best fidelity <= 1 - 1e-4 over 100 restarts)."""
    rho = commuting_chiral_qudit_qubit((0.05, 0.06, 0.07, 0.82))
    comms = []
    for group in SPLIT.groups:
        marg = partial_trace(rho, group)
        emb = embed_operator(marg.data, rho.dims, group)
        comms.append(float(np.linalg.norm(emb @ rho.data - rho.data @ emb)))
    measures = {
        "J2": ch.j2(rho, SPLIT),
        "J3": ch.j3(rho, SPLIT),
        "J3_prime": ch.j3_prime(rho, SPLIT),
        "gamma_0.7": ch.gamma_s(rho, SPLIT, 0.7),
        "phi_0.7": ch.phi_s(rho, SPLIT, 0.7),
    }
    val, res = ch.chiral_log_distance(rho, SPLIT, restarts=100, seed=1010)
    blind = max(abs(v) for v in measures.values())
    ok = max(comms) < 1e-9 and blind < 1e-9 and res.best_fidelity <= 1.0 - 1e-4
    return ok, (
        f"commutator norms {comms[0]:.1e}/{comms[1]:.1e}, largest |measure| {blind:.1e} "
        f"(tol 1e-9); best fidelity over 100 restarts {res.best_fidelity:.6f} (need <= 1-1e-4)"
    )


def criterion_11_nonmonotonicity():
    """Purified block state: log-distance < 1e-6 for the joint split and
    > 1e-3 after tracing the purifier."""
    rep = ex.nonmonotonicity_demo((0.5, 0.3, 0.2), restarts=50, seed=1111)
    ok = rep.value_joint < 1e-6 and rep.value_after_trace > 1e-3
    return ok, (
        f"joint-split value {rep.value_joint:.2e} (need < 1e-6), after tracing the "
        f"purifier {rep.value_after_trace:.4f} (need > 1e-3)"
    )


def criterion_12_maximally_mixed_marginals():
    """100 random two-qubit states with both marginals I/2: the three
    local-unitary invariants agree with the conjugate state (1e-10) and the
    optimizer realizes the guaranteed nonchirality (fidelity >= 1 - 1e-4
    within 100 restarts)."""
    worst_inv = 0.0
    worst_fid = 1.0
    for i in range(100):
        rng = split_rng(1212, i)
        rho = random_two_qubit_maximally_mixed(rng)
        inv = co.makhlin_invariants(rho)
        inv_c = co.makhlin_invariants(conjugate(rho))
        worst_inv = max(worst_inv, max(abs(a - b) for a, b in zip(inv, inv_c)))
        _, res = ch.chiral_log_distance(
            rho, SPLIT, restarts=100, seed=3_000_000 + i, target_fidelity=1.0 - 1e-4
        )
        worst_fid = min(worst_fid, res.best_fidelity)
    ok = worst_inv < 1e-10 and worst_fid >= 1.0 - 1e-4
    return ok, (
        f"worst invariant deviation {worst_inv:.2e} (tol 1e-10); worst best-fidelity "
        f"{worst_fid:.8f} (need >= 1-1e-4)"
    )


def criterion_13_scan():
    """5000-sample scan: |J2| > 1e-6 on more than 99% of samples, |Pearson|
    below the recorded threshold, and at least 1% barely-entangled samples
    with above-median |J2|."""
    rows, summary = ex.run_chirality_entanglement_scan(5000, master_seed=13131313)
    aj2 = np.array([r.abs_j2 for r in rows])
    frac_nonzero = float(np.mean(aj2 > 1e-6))
    clause_a = frac_nonzero > 0.99
    clause_b = abs(summary["pearson"]) < summary["pearson_threshold"]
    clause_c = summary["frac_low_EN_high_J2"] >= 0.01
    quantiles = {t: float(np.mean(aj2 > t)) for t in (1e-6, 1e-8, 1e-10, 1e-12)}
    detail = (
        f"frac |J2|>1e-6 = {frac_nonzero:.4f} (need > 0.99) "
        f"[fractions above 1e-8/1e-10/1e-12: {quantiles[1e-8]:.4f}/"
        f"{quantiles[1e-10]:.4f}/{quantiles[1e-12]:.4f}]; "
        f"|pearson| = {abs(summary['pearson']):.3f} (threshold {summary['pearson_threshold']}); "
        f"frac(E_N<0.01 & |J2|>median) = {summary['frac_low_EN_high_J2']:.3f} (need >= 0.01)"
    )
    if not clause_a:
        detail += (
            " -- the 1e-6 clause is unattainable for the pinned ensemble: the |J2| "
            "distribution of flat-spectrum two-qubit states has ~8% of its mass below "
            "1e-6 at any seed, while the qualitative claim (nonzero at numerical "
            "precision) holds on every sample; see the decisions ledger"
        )
    return clause_a and clause_b and clause_c, detail


def criterion_14_intrinsic_ip_properties():
    """Intrinsic IP: local-unitary invariant (1e-9), zero on constructed
    classical-quantum states (1e-9), and equal to 4x the modular-Hamiltonian
    variance on pure states."""
    worst_lu = 0.0
    worst_cq = 0.0
    worst_kappa = 0.0
    for i in range(25):
        rng = split_rng(1414, i)
        rho = random_mixed_state((2, 2), rng)
        f_a = co.intrinsic_ip(rho, SPLIT, "A")
        u = np.kron(haar_unitary(2, rng), haar_unitary(2, rng))
        rot = DensityMatrix((2, 2), u @ rho.data @ u.conj().T)
        worst_lu = max(worst_lu, abs(co.intrinsic_ip(rot, SPLIT, "A") - f_a))
        # constructed classical-quantum state
        basis = haar_unitary(3, rng)
        probs = np.sort(rng.dirichlet(np.ones(3)))
        if np.diff(probs).min() < 1e-3:
            probs = np.array([0.2, 0.3, 0.5])
        cq = np.zeros((6, 6), dtype=complex)
        for b in range(3):
            proj = np.outer(basis[:, b], basis[:, b].conj())
            cq += probs[b] * np.kron(proj, random_mixed_state((2,), rng).data)
        cq_rho = DensityMatrix((3, 2), cq)
        dec, _ = co.is_classical_quantum(cq_rho, SPLIT, "A")
        if dec is not None:
            worst_cq = max(worst_cq, abs(co.intrinsic_ip(cq_rho, SPLIT, "A")))
        # pure-state reduction with the factor-4 convention
        psi = random_pure_state(4, rng)
        pure = pure_state_density((2, 2), psi)
        marg = partial_trace(pure, [0])
        k_a = -matrix_log_on_support(marg)
        mean = float(np.real(np.trace(marg.data @ k_a)))
        var = float(np.real(np.trace(marg.data @ k_a @ k_a))) - mean**2
        if var > 1e-3:
            kappa = co.intrinsic_ip(pure, SPLIT, "A") / var
            worst_kappa = max(worst_kappa, abs(kappa - 4.0))
    ok = worst_lu < 1e-9 and worst_cq < 1e-9 and worst_kappa < 1e-6
    return ok, (
        f"worst LU-invariance residual {worst_lu:.2e} (tol 1e-9); worst |F^A| on CQ "
        f"states {worst_cq:.2e} (tol 1e-9); worst |kappa - 4| {worst_kappa:.2e} on pure states"
    )


CRITERIA = [
    ("C1", "stabilizer states are nonchiral via the solved Pauli", criterion_1_stabilizer_nonchirality),
    ("C2", "chirality lower-bounds magic on pure states", criterion_2_magic_bounds),
    ("C3", "T-state benchmarks (nullity, fidelity, Pauli distance)", criterion_3_t_state_benchmarks),
    ("C4", "additivity, oddness, local-unitary invariance", criterion_4_additivity_oddness_lu),
    ("C5", "flow-measure derivative relations", criterion_5_derivative_relations),
    ("C6", "flow measure squared bounded by intrinsic IP", criterion_6_gamma_qfi_bound),
    ("C7", "SLD quadrature identity", criterion_7_sld_integral_identity),
    ("C8", "simplex log-moment maxima", criterion_8_simplex_entropy_max),
    ("C9", "block qutrit-qubit state: chiral but measure-blind", criterion_9_chiral_example),
    ("C10", "marginal-commuting state: chiral but fully blind", criterion_10_commuting_chiral_example),
    ("C11", "log-distance grows under a local partial trace", criterion_11_nonmonotonicity),
    ("C12", "maximally-mixed-marginal states are nonchiral", criterion_12_maximally_mixed_marginals),
    ("C13", "entanglement-chirality scan", criterion_13_scan),
    ("C14", "intrinsic-IP properties", criterion_14_intrinsic_ip_properties),
]


def run_criterion(key: str) -> CriterionResult:
    for k, title, fn in CRITERIA:
        if k == key:
            start = time.perf_counter()
            passed, detail = fn()
            return CriterionResult(k, title, passed, detail, time.perf_counter() - start)
    raise KeyError(f"unknown criterion {key!r}")


def run_all(keys=None, report=print) -> list[CriterionResult]:
    results = []
    for k, title, _ in CRITERIA:
        if keys and k not in keys:
            continue
        res = run_criterion(k)
        results.append(res)
        status = "PASS" if res.passed else "FAIL"
        report(f"[{status}] {res.key} {title} ({res.seconds:.1f}s): {res.detail}")
    return results
