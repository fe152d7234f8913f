import numpy as np
import pytest

from avcqc import (
    mutual_information,
    partial_trace,
    shannon_entropy,
    tensor,
    trace_distance,
    validate_density,
    von_neumann_entropy,
)
from avcqc.errors import (
    BadSubsystemIndex,
    DimensionMismatch,
    InvalidJoint,
    NotHermitian,
    NotPositive,
    TraceNotOne,
)
from helpers import ONE, PLUS, ZERO


class TestValidateDensity:
    def test_maximally_mixed(self):
        rho = validate_density(np.eye(2) / 2)
        assert np.allclose(rho, np.eye(2) / 2)
        assert not rho.flags.writeable

    def test_pure_plus_state(self):
        rho = validate_density([[0.5, 0.5], [0.5, 0.5]])
        assert np.allclose(rho, PLUS)

    def test_indefinite_matrix_rejected(self):
        # eigenvalues of [[.5,.6],[.6,.5]] are 1.1 and -0.1 by the 2x2 formula
        with pytest.raises(NotPositive) as exc:
            validate_density([[0.5, 0.6], [0.6, 0.5]])
        assert "-1.0" in str(exc.value) or "-0.1" in str(exc.value)

    def test_non_hermitian_rejected(self):
        with pytest.raises(NotHermitian):
            validate_density([[0.5, 0.5], [0.0, 0.5]])

    def test_wrong_trace_rejected(self):
        with pytest.raises(TraceNotOne):
            validate_density(np.eye(2))


class TestEntropies:
    def test_maximally_mixed_qubit(self):
        assert von_neumann_entropy(np.eye(2) / 2) == pytest.approx(1.0, abs=1e-12)

    def test_pure_state(self):
        assert von_neumann_entropy(ZERO) == pytest.approx(0.0, abs=1e-9)

    def test_mix_of_zero_and_plus(self):
        # direct 2x2 eigendecomposition oracle: eigenvalues (1 +- 1/sqrt(2)) / 2
        lam = (1 + 2 ** -0.5) / 2
        expected = -(lam * np.log2(lam) + (1 - lam) * np.log2(1 - lam))
        rho = (ZERO + PLUS) / 2
        assert von_neumann_entropy(rho) == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(0.60088, abs=5e-6)

    def test_shannon_basic(self):
        assert shannon_entropy([0.5, 0.5]) == pytest.approx(1.0, abs=1e-12)
        assert shannon_entropy([1.0, 0.0]) == pytest.approx(0.0, abs=1e-12)
        direct = -(0.25 * np.log2(0.25) + 0.75 * np.log2(0.75))
        assert shannon_entropy([0.25, 0.75]) == pytest.approx(direct, abs=1e-12)
        assert direct == pytest.approx(0.81128, abs=5e-6)

    def test_entropy_concavity_spot_check(self):
        from avcqc.operators import random_density

        rng = np.random.default_rng(7)
        for _ in range(100):
            d = int(rng.integers(2, 4))
            rho, sig = random_density(rng, d), random_density(rng, d)
            for lam in (0.25, 0.5, 0.75):
                mix = lam * rho + (1 - lam) * sig
                assert von_neumann_entropy(mix) >= (
                    lam * von_neumann_entropy(rho)
                    + (1 - lam) * von_neumann_entropy(sig)
                    - 1e-9
                )


class TestMutualInformation:
    def test_perfect_correlation(self):
        assert mutual_information([[0.5, 0.0], [0.0, 0.5]]) == pytest.approx(1.0, abs=1e-12)

    def test_independent(self):
        assert mutual_information([[0.25, 0.25], [0.25, 0.25]]) == pytest.approx(0.0, abs=1e-12)

    def test_noisy_correlation(self):
        # 1 - H(1/4) by direct evaluation
        expected = 1.0 + 0.25 * np.log2(0.25) + 0.75 * np.log2(0.75)
        got = mutual_information([[3 / 8, 1 / 8], [1 / 8, 3 / 8]])
        assert got == pytest.approx(expected, abs=1e-12)
        assert got == pytest.approx(0.18872, abs=5e-6)

    def test_invalid_joint(self):
        with pytest.raises(InvalidJoint):
            mutual_information([[0.5, 0.2], [0.1, 0.1]])
        with pytest.raises(InvalidJoint):
            mutual_information([[0.7, -0.1], [0.2, 0.2]])

    def test_entropy_identity(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            j = rng.dirichlet(np.ones(6)).reshape(2, 3)
            lhs = mutual_information(j)
            rhs = (
                shannon_entropy(j.sum(axis=1))
                + shannon_entropy(j.sum(axis=0))
                - shannon_entropy(j.ravel())
            )
            assert lhs == pytest.approx(max(rhs, 0.0), abs=1e-10)


class TestTraceDistance:
    def test_identical(self):
        assert trace_distance(PLUS, PLUS) == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_pure(self):
        assert trace_distance(ZERO, ONE) == pytest.approx(1.0, abs=1e-12)

    def test_zero_vs_plus(self):
        # difference has eigenvalues +-1/sqrt(2) by the 2x2 formula
        assert trace_distance(ZERO, PLUS) == pytest.approx(2 ** -0.5, abs=1e-12)
        assert 2 ** -0.5 == pytest.approx(0.70711, abs=5e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            trace_distance(np.eye(2) / 2, np.eye(3) / 3)

    def test_triangle_inequality(self):
        from avcqc.operators import random_density

        rng = np.random.default_rng(13)
        for _ in range(100):
            a, b, c = (random_density(rng, 3) for _ in range(3))
            assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-9


class TestEigvalshStack:
    def test_closed_form_matches_lapack(self):
        from avcqc.operators import eigvalsh_stack

        rng = np.random.default_rng(19)
        g = rng.standard_normal((40, 2, 2)) + 1j * rng.standard_normal((40, 2, 2))
        h = g + g.conj().swapaxes(-1, -2)
        assert np.allclose(eigvalsh_stack(h), np.linalg.eigvalsh(h), atol=1e-12)

    def test_general_dimension_delegates(self):
        from avcqc.operators import eigvalsh_stack

        rng = np.random.default_rng(20)
        g = rng.standard_normal((5, 4, 4)) + 1j * rng.standard_normal((5, 4, 4))
        h = g + g.conj().swapaxes(-1, -2)
        assert np.allclose(eigvalsh_stack(h), np.linalg.eigvalsh(h), atol=1e-12)


class TestTensorAndPartialTrace:
    def test_product_state_reduction(self):
        full = tensor(np.eye(2) / 2, ZERO)
        reduced = partial_trace(full, (2, 2), 0)
        assert np.allclose(reduced, ZERO, atol=1e-12)

    def test_scalar_tensor_identity(self):
        rho = PLUS
        assert np.allclose(tensor(np.eye(1), rho), rho)

    def test_bell_state_marginal(self):
        bell = np.zeros((4, 4), dtype=complex)
        for i in (0, 3):
            for j in (0, 3):
                bell[i, j] = 0.5
        reduced = partial_trace(bell, (2, 2), 1)
        assert np.allclose(reduced, np.eye(2) / 2, atol=1e-12)

    def test_trace_preserving(self):
        from avcqc.operators import random_density

        rng = np.random.default_rng(17)
        for _ in range(20):
            op = tensor(random_density(rng, 2), random_density(rng, 3))
            for axis in (0, 1):
                red = partial_trace(op, (2, 3), axis)
                assert np.trace(red) == pytest.approx(np.trace(op), abs=1e-10)

    def test_bad_subsystem(self):
        with pytest.raises(BadSubsystemIndex):
            partial_trace(np.eye(4) / 4, (2, 2), 2)
