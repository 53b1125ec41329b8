"""Seedable random ensembles: Haar unitaries, flat-simplex spectra, mixed
states, and the counter-based stream splitting that keeps parallel Monte
Carlo runs reproducible regardless of worker count."""

from __future__ import annotations

import numpy as np

from .qmat import DensityMatrix

_MASK64 = (1 << 64) - 1


def derive_seed(master_seed: int, index: int) -> int:
    """splitmix64-style mix of (master_seed, index) into one 64-bit stream key.

    Pure arithmetic on the pair, so draws for sample `index` never depend on
    execution order or worker count.
    """
    z = (int(master_seed) + 0x9E3779B97F4A7C15 * (int(index) + 1)) & _MASK64
    for _ in range(2):
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        z = z ^ (z >> 31)
    return z


def split_rng(master_seed: int, index: int) -> np.random.Generator:
    """Counter-based per-sample generator (Philox keyed by the derived seed)."""
    return np.random.Generator(np.random.Philox(key=derive_seed(master_seed, index)))


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary: QR of a complex Ginibre matrix with the R diagonal
    rephased to unit modulus."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r)
    return q * (diag / np.abs(diag))


def simplex_point(d: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform point of the probability simplex via normalized exponentials."""
    e = rng.exponential(size=d)
    return e / e.sum()


def random_mixed_state(dims, rng: np.random.Generator) -> DensityMatrix:
    """U diag(p) U† with U Haar and p a flat-simplex spectrum."""
    dims = tuple(int(x) for x in dims)
    d = int(np.prod(dims))
    p = simplex_point(d, rng)
    u = haar_unitary(d, rng)
    return DensityMatrix(dims, (u * p) @ u.conj().T)


def random_pure_state(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unit vector."""
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)


_PAULIS = (
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def random_two_qubit_maximally_mixed(
    rng: np.random.Generator, min_eig: float = 1e-3
) -> DensityMatrix:
    """Random two-qubit state with both marginals exactly I/2: a uniform
    correlation matrix on sigma_i (x) sigma_j, rejection-sampled for
    positivity with margin min_eig."""
    eye = np.eye(4, dtype=complex) / 4.0
    while True:
        b = rng.uniform(-1.0, 1.0, size=(3, 3))
        data = eye.copy()
        for i in range(3):
            for j in range(3):
                data += (b[i, j] / 8.0) * np.kron(_PAULIS[i], _PAULIS[j])
        if np.linalg.eigvalsh(data)[0] > min_eig:
            return DensityMatrix((2, 2), data)
