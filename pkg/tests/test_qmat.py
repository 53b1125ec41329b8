"""Matrix-substrate tests: worked examples plus the module invariants."""

import numpy as np
import pytest

from chiralkit.qmat import (
    DensityMatrix,
    Partition,
    ShapeMismatchError,
    StateInvariantError,
    conjugate,
    eig_hermitian,
    embed_operator,
    imaginary_power,
    matrix_log_on_support,
    partial_trace,
    partial_transpose,
    pure_state_density,
    purify,
    tensor_product,
    trace_norm,
    uhlmann_fidelity,
)
from chiralkit.sampling import haar_unitary, random_mixed_state, split_rng
from chiralkit.states import bell_state, chiral_qutrit_qubit, purified_chiral_qutrit_qubit

Y = np.array([[0, -1j], [1j, 0]])
X = np.array([[0, 1], [1, 0]])
Z = np.array([[1, 0], [0, -1]])


def rho_rand(dims, seed, stream=0):
    return random_mixed_state(dims, split_rng(seed, stream))


class TestEig:
    def test_identity(self):
        dec = eig_hermitian(np.eye(2))
        assert np.allclose(dec.eigenvalues, [1, 1])
        assert np.allclose(dec.eigenvectors.conj().T @ dec.eigenvectors, np.eye(2))

    def test_pauli_z(self):
        dec = eig_hermitian(Z)
        assert np.allclose(dec.eigenvalues, [-1, 1])

    def test_half_identity_plus_y(self):
        # closed form: eigenvalues of (I+Y)/2 are (1 +- 1)/2
        dec = eig_hermitian((np.eye(2) + Y) / 2)
        assert np.allclose(dec.eigenvalues, [0, 1], atol=1e-12)

    def test_reconstruction_and_determinism(self):
        m = rho_rand((2, 3), 1).data
        d1 = eig_hermitian(m)
        d2 = eig_hermitian(m)
        assert np.array_equal(d1.eigenvectors, d2.eigenvectors)
        assert np.linalg.norm(d1.reconstruct() - m) < 1e-9 * np.linalg.norm(m)

    def test_rejects_non_hermitian(self):
        with pytest.raises(StateInvariantError, match="not Hermitian"):
            eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


class TestLogOnSupport:
    def test_maximally_mixed(self):
        rho = DensityMatrix((2, 2), np.eye(4) / 4)
        assert np.allclose(matrix_log_on_support(rho), np.log(0.25) * np.eye(4))

    def test_pure_state_is_zero_on_support(self):
        rho = pure_state_density((2,), [1, 0])
        assert np.allclose(matrix_log_on_support(rho), np.zeros((2, 2)))

    def test_diagonal(self):
        rho = DensityMatrix((2,), np.diag([0.75, 0.25]).astype(complex))
        assert np.allclose(matrix_log_on_support(rho), np.diag(np.log([0.75, 0.25])))

    @pytest.mark.parametrize("dims", [(2, 2), (2, 3), (3, 3)])
    def test_exp_round_trip(self, dims):
        rho = rho_rand(dims, 2, dims[1])
        dec = eig_hermitian(matrix_log_on_support(rho))
        back = (dec.eigenvectors * np.exp(dec.eigenvalues)) @ dec.eigenvectors.conj().T
        assert np.linalg.norm(back - rho.data) < 1e-9


class TestImaginaryPower:
    def test_s_zero(self):
        rho = rho_rand((2, 2), 3)
        assert np.allclose(imaginary_power(rho, 0.0), np.eye(4))

    def test_diagonal_formula(self):
        rho = DensityMatrix((2,), np.eye(2) / 2)
        expected = np.exp(1j * np.log(0.5)) * np.eye(2)
        assert np.allclose(imaginary_power(rho, 1.0), expected)

    def test_group_property(self):
        rho = rho_rand((2, 2), 4)
        u = imaginary_power(rho, 0.37)
        v = imaginary_power(rho, -0.37)
        assert np.allclose(u @ v, np.eye(4), atol=1e-9)
        assert np.max(np.abs(u @ u.conj().T - np.eye(4))) < 1e-9


class TestTensorAndTrace:
    def test_tensor_identity(self):
        half = DensityMatrix((2,), np.eye(2) / 2)
        assert np.allclose(tensor_product(half, half).data, np.eye(4) / 4)

    def test_tensor_basis_states(self):
        p0 = pure_state_density((2,), [1, 0])
        p1 = pure_state_density((2,), [0, 1])
        out = tensor_product(p0, p1)
        expected = np.zeros((4, 4))
        expected[1, 1] = 1
        assert np.allclose(out.data, expected)

    def test_tensor_spectrum_is_outer_product(self):
        a, b = rho_rand((2,), 5), rho_rand((2,), 5, 1)
        got = np.sort(tensor_product(a, b).eigenvalues())
        want = np.sort(np.outer(a.eigenvalues(), b.eigenvalues()).ravel())
        assert np.allclose(got, want, atol=1e-10)

    def test_partial_trace_product(self):
        a, b = rho_rand((2, 2), 6), rho_rand((3,), 6, 1)
        joint = tensor_product(a, b)
        assert np.max(np.abs(partial_trace(joint, [0, 1]).data - a.data)) < 1e-12
        assert np.max(np.abs(partial_trace(joint, [2]).data - b.data)) < 1e-12

    def test_partial_trace_bell(self):
        assert np.allclose(partial_trace(bell_state(), [0]).data, np.eye(2) / 2)

    def test_partial_trace_purification_recovers_block_state(self):
        # tracing the purifying qutrit recovers the chiral block state
        psi, dims = purified_chiral_qutrit_qubit((0.5, 0.3, 0.2))
        full = pure_state_density(dims, psi)
        reduced = partial_trace(full, [0, 2])
        assert np.max(np.abs(reduced.data - chiral_qutrit_qubit((0.5, 0.3, 0.2)).data)) < 1e-12

    def test_empty_keep_rejected(self):
        with pytest.raises(ValueError, match="full trace"):
            partial_trace(bell_state(), [])


class TestPartialTranspose:
    def test_product_spectrum_unchanged(self):
        a, b = rho_rand((2,), 7), rho_rand((2,), 7, 1)
        joint = tensor_product(a, b)
        pt = partial_transpose(joint, [1])
        assert np.allclose(np.linalg.eigvalsh(pt), np.sort(joint.eigenvalues()), atol=1e-10)

    def test_bell_min_eigenvalue(self):
        pt = partial_transpose(bell_state(), [1])
        assert abs(np.linalg.eigvalsh(pt)[0] + 0.5) < 1e-12

    def test_involution(self):
        rho = rho_rand((2, 3), 8)
        assert np.allclose(partial_transpose(
            DensityMatrix(rho.dims, partial_transpose(rho, [1]), atol=1.0), [1]), rho.data)


class TestTraceNorm:
    def test_identity_and_pauli(self):
        assert trace_norm(np.eye(4)) == pytest.approx(4.0)
        assert trace_norm(X) == pytest.approx(2.0)

    def test_against_singular_value_oracle(self):
        rng = split_rng(9, 0)
        m = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        oracle = np.sum(np.sqrt(np.clip(np.linalg.eigvalsh(m.conj().T @ m), 0, None)))
        assert trace_norm(m) == pytest.approx(oracle, abs=1e-10)

    def test_partial_transpose_trace_norm_at_least_one(self):
        for i in range(20):
            rho = rho_rand((2, 2), 10, i)
            assert trace_norm(partial_transpose(rho, [1])) >= 1 - 1e-12


class TestFidelity:
    def test_self(self):
        rho = rho_rand((2, 2), 11)
        assert uhlmann_fidelity(rho, rho) == pytest.approx(1.0, abs=1e-10)

    def test_orthogonal_and_mixed(self):
        p0 = pure_state_density((2,), [1, 0])
        p1 = pure_state_density((2,), [0, 1])
        half = DensityMatrix((2,), np.eye(2) / 2)
        assert uhlmann_fidelity(p0, p1) == pytest.approx(0.0, abs=1e-12)
        assert uhlmann_fidelity(p0, half) == pytest.approx(0.5, abs=1e-12)

    def test_pure_pure_is_squared_overlap(self):
        # the sqrt of clamped near-zero eigenvalues limits accuracy to ~1e-8
        rng = split_rng(12, 0)
        for _ in range(5):
            u = haar_unitary(4, rng)
            a, b = u[:, 0], u @ np.array([0.6, 0.8, 0, 0], dtype=complex)
            fa = uhlmann_fidelity(pure_state_density((4,), a), pure_state_density((4,), b))
            assert fa == pytest.approx(abs(np.vdot(a, b)) ** 2, abs=1e-7)

    def test_unitary_invariance(self):
        rho, sig = rho_rand((2, 2), 13), rho_rand((2, 2), 13, 1)
        rng = split_rng(13, 2)
        u = haar_unitary(4, rng)
        rot = lambda m: DensityMatrix((2, 2), u @ m.data @ u.conj().T)
        assert uhlmann_fidelity(rot(rho), rot(sig)) == pytest.approx(
            uhlmann_fidelity(rho, sig), abs=1e-9
        )

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            uhlmann_fidelity(rho_rand((2,), 14), rho_rand((3,), 14))


class TestPurify:
    def test_pure_input_has_trivial_ancilla(self):
        rho = pure_state_density((2, 2), [0.6, 0.8j, 0, 0])
        vec = purify(rho)
        assert vec.shape == (4,)
        assert rho.rank() == 1

    def test_maximally_mixed_qubit_gives_bell_type(self):
        rho = DensityMatrix((2,), np.eye(2) / 2)
        vec = purify(rho).reshape(2, 2)
        schmidt = np.linalg.svd(vec, compute_uv=False)
        assert np.allclose(schmidt, [1 / np.sqrt(2)] * 2, atol=1e-12)

    def test_round_trip(self):
        rho = rho_rand((2, 3), 15)
        r = rho.rank()
        full = pure_state_density(rho.dims + (r,), purify(rho))
        back = partial_trace(full, [0, 1])
        assert np.max(np.abs(back.data - rho.data)) < 1e-9

    def test_matches_reference_purification_up_to_ancilla_unitary(self):
        # both purifications of the block state reduce to the same marginal
        rho = chiral_qutrit_qubit((0.5, 0.3, 0.2))
        vec = purify(rho)
        mine = pure_state_density(rho.dims + (rho.rank(),), vec)
        psi_ref, dims_ref = purified_chiral_qutrit_qubit((0.5, 0.3, 0.2))
        reordered = np.transpose(psi_ref.reshape(dims_ref), (0, 2, 1)).reshape(-1)
        ref = pure_state_density((3, 2, 3), reordered)  # A, B, ancilla order
        for state, keep in ((mine, [0, 1]), (ref, [0, 1])):
            assert np.max(np.abs(partial_trace(state, keep).data - rho.data)) < 1e-9


class TestConjugate:
    def test_real_fixed_point(self):
        rho = bell_state()
        assert np.allclose(conjugate(rho).data, rho.data)

    def test_y_flips(self):
        rho = DensityMatrix((2,), (np.eye(2) + Y) / 2)
        assert np.allclose(conjugate(rho).data, (np.eye(2) - Y) / 2)

    def test_involution_and_spectrum(self):
        rho = rho_rand((2, 3), 16)
        assert np.allclose(conjugate(conjugate(rho)).data, rho.data)
        assert np.allclose(conjugate(rho).eigenvalues(), rho.eigenvalues(), atol=1e-12)


class TestEmbedAndPartition:
    def test_embed_single_site(self):
        e = embed_operator(X, (2, 3), [0])
        assert np.allclose(e, np.kron(X, np.eye(3)))

    def test_embed_out_of_order(self):
        a = np.diag([1.0, 2.0]).astype(complex)
        b = np.diag([3.0, 4.0]).astype(complex)
        e = embed_operator(np.kron(a, b), (2, 3, 2), [2, 0])
        assert np.allclose(e, np.kron(b, np.kron(np.eye(3), a)))

    def test_partition_parse(self):
        part = Partition.parse("0,2|1")
        assert part.groups == ((0, 2), (1,))
        part.validate(3)
        with pytest.raises(ValueError, match="overlap"):
            Partition.parse("0,1|1")
        with pytest.raises(ValueError, match="cover"):
            Partition.parse("0|1").validate(3)


class TestDensityMatrixInvariants:
    def test_rejects_bad_trace(self):
        with pytest.raises(StateInvariantError, match="trace"):
            DensityMatrix((2,), np.eye(2, dtype=complex))

    def test_rejects_negative(self):
        with pytest.raises(StateInvariantError, match="negative eigenvalue"):
            DensityMatrix((2,), np.diag([1.5, -0.5]).astype(complex))

    def test_rejects_non_hermitian(self):
        m = np.array([[0.5, 0.5], [0, 0.5]], dtype=complex)
        with pytest.raises(StateInvariantError, match="Hermitian"):
            DensityMatrix((2,), m)

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ShapeMismatchError):
            DensityMatrix((2, 2), np.eye(2, dtype=complex) / 2)

    def test_data_read_only(self):
        rho = rho_rand((2,), 17)
        with pytest.raises(ValueError):
            rho.data[0, 0] = 1.0
