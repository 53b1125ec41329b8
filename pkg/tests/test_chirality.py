"""Chirality-measure tests: worked examples against independent oracles,
structural invariants, and the orbit optimizer."""

import numpy as np
import pytest

from chiralkit import chirality as ch
from chiralkit import _pauli
from chiralkit.qmat import (
    DensityMatrix,
    Partition,
    bipartition,
    conjugate,
    eig_hermitian,
    pure_state_density,
    tensor_product,
)
from chiralkit.sampling import random_mixed_state, random_pure_state, split_rng
from chiralkit.states import chiral_qutrit_qubit, t_state_vector

SPLIT = bipartition([0], [1])


def rho_rand(dims, seed, stream=0):
    return random_mixed_state(dims, split_rng(seed, stream))


def classical_state(seed):
    """sum_ij p_ij |i><i| (x) |j><j| with a random joint distribution."""
    rng = split_rng(seed, 0)
    p = rng.dirichlet(np.ones(4)).reshape(2, 2)
    return DensityMatrix((2, 2), np.diag(p.ravel()).astype(complex))


# --- independent eigenbasis oracles (explicit index sums, no matrix algebra)


def _modular_pieces(rho, split):
    ms = ch.modular_set(rho, split)
    dec = eig_hermitian(rho.data)
    v = dec.eigenvectors
    rot = lambda m: v.conj().T @ m @ v
    return dec.eigenvalues, rot(ms.k_ab), rot(ms.k_a), rot(ms.k_b), rot(rho.data)


def oracle_j2(rho, split):
    p, k, ka, kb, r = _modular_pieces(rho, split)
    d = len(p)
    x = np.zeros((d, d), dtype=complex)
    for a in range(d):
        for b in range(d):
            for c in range(d):
                x[a, b] += k[a, c] * ka[c, b] - ka[a, c] * k[c, b]
    tot = 0.0j
    for a in range(d):
        for b in range(d):
            for c in range(d):
                tot += r[a, b] * (x[b, c] * kb[c, a] + kb[b, c] * x[c, a])
    return (1j * tot).real


def oracle_j3(rho, split):
    p, k, ka, kb, r = _modular_pieces(rho, split)
    comm = lambda a, b: a @ b - b @ a
    x = comm(k, comm(k, ka))
    tot = np.trace(r @ (x @ kb - kb @ x))
    return (1j * tot).real


def oracle_gamma_s(rho, split, s):
    # flow phases written out explicitly in the eigenbasis; the flow-even
    # part averages e^{+is d} and e^{-is d} elementwise (cos), not the adjoint
    p, k, ka, kb, r = _modular_pieces(rho, split)
    d = len(p)
    kappa = np.diag(k).real
    kplus = np.array(
        [[np.cos(s * (kappa[j] - kappa[l])) * ka[j, l] for l in range(d)] for j in range(d)]
    )
    tot = np.trace(r @ (kplus @ kb - kb @ kplus))
    return (1j * tot).real


def oracle_j3_prime(rho, split):
    p, k, ka, kb, r = _modular_pieces(rho, split)
    d = len(p)

    def comm_loops(a, b):
        out = np.zeros((d, d), dtype=complex)
        for i in range(d):
            for j in range(d):
                for l in range(d):
                    out[i, j] += a[i, l] * b[l, j] - b[i, l] * a[l, j]
        return out

    x = comm_loops(comm_loops(comm_loops(k, kb), kb), kb)
    return (1j * np.trace(r @ x)).real


def oracle_phi_s(rho, split, s):
    # odd flow part in the eigenbasis: -sin(s d) elementwise
    p, k, ka, kb, r = _modular_pieces(rho, split)
    d = len(p)
    kappa = np.diag(k).real
    kminus = np.array(
        [[-np.sin(s * (kappa[j] - kappa[l])) * ka[j, l] for l in range(d)] for j in range(d)]
    )
    tot = np.trace(r @ (kminus @ kb + kb @ kminus))
    return (1j * tot).real


def oracle_modular_commutator(rho, split):
    groups = split.groups
    from chiralkit.qmat import embed_operator, matrix_log_on_support, partial_trace

    kab = embed_operator(
        -matrix_log_on_support(partial_trace(rho, groups[0] + groups[1])),
        rho.dims,
        groups[0] + groups[1],
    )
    kbc = embed_operator(
        -matrix_log_on_support(partial_trace(rho, groups[1] + groups[2])),
        rho.dims,
        groups[1] + groups[2],
    )
    tot = 0.0j
    d = rho.dim
    for a in range(d):
        for b in range(d):
            for c in range(d):
                tot += rho.data[a, b] * (kab[b, c] * kbc[c, a] - kbc[b, c] * kab[c, a])
    return (1j * tot).real


class TestModularSet:
    def test_maximally_mixed(self):
        ms = ch.modular_set(DensityMatrix((2, 2), np.eye(4) / 4), SPLIT)
        assert np.allclose(ms.k_ab, np.log(4) * np.eye(4))
        assert np.allclose(ms.k_a, np.log(2) * np.eye(4))

    def test_product_additivity_of_logs(self):
        a, b = rho_rand((2,), 20), rho_rand((2,), 20, 1)
        ms = ch.modular_set(tensor_product(a, b), SPLIT)
        assert np.max(np.abs(ms.k_ab - ms.k_a - ms.k_b)) < 1e-9

    def test_round_trip(self):
        rho = rho_rand((2, 2), 21)
        ms = ch.modular_set(rho, SPLIT)
        dec = eig_hermitian(-ms.k_ab)
        back = (dec.eigenvectors * np.exp(dec.eigenvalues)) @ dec.eigenvectors.conj().T
        assert np.max(np.abs(back - rho.data)) < 1e-9

    def test_marginal_hamiltonians_commute(self):
        rho = rho_rand((2, 3), 22)
        ms = ch.modular_set(rho, SPLIT)
        assert np.max(np.abs(ms.k_a @ ms.k_b - ms.k_b @ ms.k_a)) < 1e-10


class TestNestedCommutatorMeasures:
    def test_product_state_vanishes(self):
        prod = tensor_product(rho_rand((2,), 23), rho_rand((2,), 23, 1))
        assert abs(ch.j2(prod, SPLIT)) < 1e-12
        assert abs(ch.j3(prod, SPLIT)) < 1e-12
        assert abs(ch.j3_prime(prod, SPLIT)) < 1e-12

    def test_two_qubit_pure_state_vanishes(self):
        psi = random_pure_state(4, split_rng(24, 0))
        rho = pure_state_density((2, 2), psi)
        assert abs(ch.j2(rho, SPLIT)) < 1e-9
        assert abs(ch.j3(rho, SPLIT)) < 1e-9

    def test_classical_state_vanishes(self):
        rho = classical_state(25)
        for fn in (ch.j2, ch.j3, ch.j3_prime):
            assert abs(fn(rho, SPLIT)) < 1e-12

    def test_j2_matches_oracle(self):
        rho = rho_rand((2, 2), 26)
        assert ch.j2(rho, SPLIT) == pytest.approx(oracle_j2(rho, SPLIT), abs=1e-12)

    def test_j3_matches_oracle(self):
        rho = rho_rand((2, 2), 27)
        assert ch.j3(rho, SPLIT) == pytest.approx(oracle_j3(rho, SPLIT), abs=1e-12)

    def test_j3_prime_matches_oracle(self):
        rho = rho_rand((2, 2), 27, 1)
        assert ch.j3_prime(rho, SPLIT) == pytest.approx(oracle_j3_prime(rho, SPLIT), abs=1e-11)

    @pytest.mark.parametrize("fn", [ch.j2, ch.j3], ids=["J2", "J3"])
    def test_swap_antisymmetry(self, fn):
        rho = rho_rand((2, 2), 28)
        assert fn(rho, bipartition([1], [0])) == pytest.approx(-fn(rho, SPLIT), abs=1e-9)

    def test_oddness_and_additivity(self):
        rho, sig = rho_rand((2, 2), 29), rho_rand((2, 2), 29, 1)
        comp = bipartition([0, 2], [1, 3])
        for fn in (ch.j2, ch.j3, ch.j3_prime):
            assert fn(conjugate(rho), SPLIT) == pytest.approx(-fn(rho, SPLIT), abs=1e-9)
            total = fn(tensor_product(rho, sig), comp)
            assert total == pytest.approx(fn(rho, SPLIT) + fn(sig, SPLIT), abs=1e-8)


class TestModularFlow:
    def test_s_zero(self):
        rho = rho_rand((2, 2), 30)
        ms = ch.modular_set(rho, SPLIT)
        kp, km = ch.modular_flowed_k(rho, SPLIT, "A", 0.0)
        assert np.allclose(kp, ms.k_a, atol=1e-12)
        assert np.max(np.abs(km)) < 1e-12

    def test_product_state_flow_is_trivial(self):
        prod = tensor_product(rho_rand((2,), 31), rho_rand((2,), 31, 1))
        ms = ch.modular_set(prod, SPLIT)
        kp, km = ch.modular_flowed_k(prod, SPLIT, "B", 1.3)
        assert np.max(np.abs(kp - ms.k_b)) < 1e-9
        assert np.max(np.abs(km)) < 1e-9

    def test_series_leading_term(self):
        rho = rho_rand((2, 2), 32)
        ms = ch.modular_set(rho, SPLIT)
        s = 1e-4
        _, km = ch.modular_flowed_k(rho, SPLIT, "A", s)
        lead = -s * (ms.k_ab @ ms.k_a - ms.k_a @ ms.k_ab)
        assert np.max(np.abs(km - lead)) < 1e-10

    def test_trace_against_state_vanishes(self):
        rho = rho_rand((2, 3), 33)
        _, km = ch.modular_flowed_k(rho, SPLIT, "A", 0.9)
        assert abs(np.trace(rho.data @ km)) < 1e-10

    def test_gamma_phi_at_zero(self):
        rho = rho_rand((2, 2), 34)
        assert abs(ch.gamma_s(rho, SPLIT, 0.0)) < 1e-10
        assert abs(ch.phi_s(rho, SPLIT, 0.0)) < 1e-10

    def test_gamma_s_matches_oracle(self):
        rho = rho_rand((2, 2), 35)
        assert ch.gamma_s(rho, SPLIT, 0.7) == pytest.approx(
            oracle_gamma_s(rho, SPLIT, 0.7), abs=1e-11
        )

    def test_phi_s_matches_oracle(self):
        rho = rho_rand((2, 2), 35, 1)
        assert ch.phi_s(rho, SPLIT, 0.7) == pytest.approx(
            oracle_phi_s(rho, SPLIT, 0.7), abs=1e-11
        )

    def test_derivative_relations(self):
        rho = rho_rand((2, 2), 36)
        d2 = ch.gamma_s_second_difference(rho, SPLIT, 1e-3)
        d1 = ch.phi_s_first_difference(rho, SPLIT, 1e-3)
        assert d2 == pytest.approx(-ch.j3(rho, SPLIT), rel=1e-5, abs=1e-6)
        assert d1 == pytest.approx(-ch.j2(rho, SPLIT), rel=1e-5, abs=1e-6)

    def test_stable_differences_equal_naive_ones(self):
        rho = rho_rand((2, 2), 37)
        h = 1e-3
        naive2 = (
            ch.gamma_s(rho, SPLIT, h) - 2 * ch.gamma_s(rho, SPLIT, 0.0) + ch.gamma_s(rho, SPLIT, -h)
        ) / h**2
        naive1 = (ch.phi_s(rho, SPLIT, h) - ch.phi_s(rho, SPLIT, -h)) / (2 * h)
        assert ch.gamma_s_second_difference(rho, SPLIT, h) == pytest.approx(naive2, abs=1e-7)
        assert ch.phi_s_first_difference(rho, SPLIT, h) == pytest.approx(naive1, abs=1e-7)

    def test_swap_antisymmetry(self):
        rho = rho_rand((2, 2), 38)
        swapped = bipartition([1], [0])
        assert ch.gamma_s(rho, swapped, 0.7) == pytest.approx(-ch.gamma_s(rho, SPLIT, 0.7), abs=1e-9)
        assert ch.phi_s(rho, swapped, 0.7) == pytest.approx(-ch.phi_s(rho, SPLIT, 0.7), abs=1e-9)


class TestGammaIntegral:
    def test_product_state(self):
        prod = tensor_product(rho_rand((2,), 40), rho_rand((2,), 40, 1))
        assert abs(ch.gamma_integral(prod, SPLIT)) < 1e-10

    def test_oddness(self):
        rho = rho_rand((2, 2), 41)
        assert ch.gamma_integral(conjugate(rho), SPLIT) == pytest.approx(
            -ch.gamma_integral(rho, SPLIT), abs=1e-8
        )

    def test_against_sld_form_oracle(self):
        # independent route: -i Tr(K_A sqrt(rho) R^{-1}([rho, K_B]) sqrt(rho))
        from chiralkit.correlations import sld_apply

        rho = rho_rand((2, 2), 42)
        ms = ch.modular_set(rho, SPLIT)
        dec = eig_hermitian(rho.data)
        sq = (dec.eigenvectors * np.sqrt(np.clip(dec.eigenvalues, 0, None))) @ dec.eigenvectors.conj().T
        c = rho.data @ ms.k_b - ms.k_b @ rho.data
        oracle = np.real(-1j * np.trace(ms.k_a @ sq @ sld_apply(rho, c) @ sq))
        assert ch.gamma_integral(rho, SPLIT) == pytest.approx(oracle, abs=1e-8)

    def test_rank_deficient_rejected(self):
        with pytest.raises(ValueError, match="rank-deficient"):
            ch.gamma_integral(chiral_qutrit_qubit(), SPLIT)

    def test_truncation_bound_reported(self):
        res = ch.gamma_integral_detail(rho_rand((2, 2), 43), SPLIT)
        assert res.truncation_bound >= 0
        assert res.truncation_bound < 1e-9


class TestModularCommutator:
    TRI = Partition(((0,), (1,), (2,)))

    def test_product_vanishes(self):
        prod = tensor_product(tensor_product(rho_rand((2,), 44), rho_rand((2,), 44, 1)), rho_rand((2,), 44, 2))
        assert abs(ch.modular_commutator(prod, self.TRI)) < 1e-10

    def test_tripartite_pure_vanishes(self):
        psi = random_pure_state(8, split_rng(45, 0))
        rho = pure_state_density((2, 2, 2), psi)
        assert abs(ch.modular_commutator(rho, self.TRI)) < 1e-9

    def test_against_oracle(self):
        rho = rho_rand((2, 2, 2), 46)
        assert ch.modular_commutator(rho, self.TRI) == pytest.approx(
            oracle_modular_commutator(rho, self.TRI), abs=1e-11
        )


class TestLogDistanceOptimizer:
    def test_product_basis_state(self):
        rho = pure_state_density((2, 2), [1, 0, 0, 0])
        val, res = ch.chiral_log_distance(rho, SPLIT, restarts=1)
        assert val <= 1e-12 and res.best_fidelity == pytest.approx(1.0, abs=1e-12)

    def test_bipartite_pure_state(self):
        psi = random_pure_state(4, split_rng(47, 0))
        rho = pure_state_density((2, 2), psi)
        val, _ = ch.chiral_log_distance(rho, SPLIT, restarts=5, seed=47)
        assert val < 1e-8

    def test_block_state_is_chiral(self):
        rho = chiral_qutrit_qubit((0.5, 0.3, 0.2))
        val, res = ch.chiral_log_distance(rho, SPLIT, restarts=50, seed=48)
        assert res.best_fidelity < 1 - 1e-3
        assert not res.certifies_nonchirality

    def test_value_nonnegative_and_overlap_consistent(self):
        rho = rho_rand((2, 2), 49)
        val, res = ch.chiral_log_distance(rho, SPLIT, restarts=8, seed=49)
        assert val >= -1e-12
        assert res.best_fidelity <= 1 + 1e-12
        recomputed = ch.orbit_overlap(rho, SPLIT, res.unitaries)
        assert abs(recomputed - res.overlap) < 1e-9
        assert abs(abs(recomputed) ** 2 - res.best_fidelity) < 1e-9

    def test_evenness_under_conjugation(self):
        rho = rho_rand((2, 2), 50)
        v1, _ = ch.chiral_log_distance(rho, SPLIT, restarts=20, seed=50)
        v2, _ = ch.chiral_log_distance(conjugate(rho), SPLIT, restarts=20, seed=51)
        assert v1 == pytest.approx(v2, abs=1e-6)

    def test_restart_accounting(self):
        rho = rho_rand((2, 2), 52)
        _, res = ch.chiral_log_distance(rho, SPLIT, restarts=4, seed=52)
        assert res.restarts == 4
        assert len(res.iterations_per_restart) == 4
        assert len(res.fidelities) == 4
        assert res.best_restart == int(np.argmax(res.fidelities))

    def test_extra_inits_are_used(self):
        # warm-starting with the exact conjugating unitaries gives fidelity 1
        rho = DensityMatrix((2,), (np.eye(2) + np.array([[0, -1j], [1j, 0]])) / 2)
        part = Partition(((0,),))
        x = np.array([[0, 1], [1, 0]], dtype=complex)
        val, res = ch.chiral_log_distance(
            rho, part, restarts=1, extra_inits=[[x]], seed=0
        )
        assert res.best_fidelity == pytest.approx(1.0, abs=1e-12)

    def test_requires_at_least_one_restart(self):
        with pytest.raises(ValueError, match="restarts"):
            ch.chiral_log_distance(rho_rand((2, 2), 53), SPLIT, restarts=0)


class TestPauliLogDistance:
    def test_t_state(self):
        assert ch.pauli_log_distance(t_state_vector(), 1) < 1e-12

    def test_stabilizer_states(self):
        from chiralkit.stabilizer import random_stabilizer_vector

        for i in range(10):
            psi = random_stabilizer_vector(3, split_rng(54, i))
            assert ch.pauli_log_distance(psi, 3) < 1e-10

    def test_against_brute_force(self):
        psi = random_pure_state(8, split_rng(55, 0))
        best = 0.0
        for z in range(8):
            for x in range(8):
                p = _pauli.pauli_matrix(z, x, 3)
                best = max(best, abs(psi.T @ p @ psi) ** 2)
        assert ch.pauli_log_distance(psi, 3) == pytest.approx(-np.log(best), abs=1e-12)

    def test_upper_bounds_log_distance(self):
        from chiralkit import _pauli as pl

        psi = random_pure_state(8, split_rng(56, 0))
        cp, (z, x) = ch.pauli_log_distance_detail(psi, 3)
        warm = pl.single_qubit_factors(z, x, 3)
        c, _ = ch.pure_state_log_distance(psi, (2, 2, 2), restarts=10, seed=56, extra_inits=[warm])
        assert c <= cp + 1e-7

    def test_qudit_rejected(self):
        with pytest.raises(ValueError, match="not 2"):
            ch.pauli_log_distance(np.ones(6) / np.sqrt(6), 2)


class TestMeasureReport:
    def test_odd_measures_flip_sign(self):
        rho = rho_rand((2, 2), 57)
        rep = ch.measure_report(rho, SPLIT)
        rep_c = ch.measure_report(conjugate(rho), SPLIT)
        for name, value in rep.entries.items():
            assert rep_c.entries[name] == pytest.approx(-value, abs=rep.tolerances[name])

    def test_rank_deficient_gamma_noted(self):
        rep = ch.measure_report(chiral_qutrit_qubit(), SPLIT)
        assert "gamma" not in rep.entries
        assert "rank-deficient" in rep.notes["gamma"]
