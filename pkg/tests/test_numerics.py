"""Tests for the numerical kernel."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.core.errors import ConvergenceError, InvalidInputError
from src.core.numerics import (
    RngStream,
    as_cvec,
    hermitian_principal_eig,
    is_hermitian,
    psd_factor,
    sample_complex_gaussian,
    sample_from_factor,
    standard_complex_normal,
    unit_modulus,
)


def random_hermitian(seed: int, n: int) -> np.ndarray:
    x = standard_complex_normal(RngStream(seed).generator(), (n, n))
    return 0.5 * (x + x.conj().T)


class TestRngStream:
    def test_same_stream_same_draws(self):
        a = RngStream(3, 5).generator().random(8)
        b = RngStream(3, 5).generator().random(8)
        assert np.array_equal(a, b)

    def test_stream_ids_differ(self):
        a = RngStream(3, 5).generator().random(8)
        b = RngStream(3, 6).generator().random(8)
        assert not np.array_equal(a, b)

    def test_child_differs_from_parent(self):
        parent = RngStream(3, 5)
        assert not np.array_equal(parent.generator().random(4), parent.child(0).generator().random(4))

    def test_negative_seed_rejected(self):
        with pytest.raises(InvalidInputError):
            RngStream(-1)


class TestValidation:
    def test_nan_rejected(self):
        with pytest.raises(InvalidInputError):
            as_cvec([1.0, np.nan])

    def test_hermitian_detection(self):
        m = random_hermitian(0, 4)
        assert is_hermitian(m)
        m[0, 1] += 1.0
        assert not is_hermitian(m)

    def test_unit_modulus_maps_zero_to_one(self):
        assert np.allclose(unit_modulus([0.0, -2.0, 3j]), [1.0, -1.0, 1j])


class TestHermitianPrincipalEig:
    """Power iteration against characteristic polynomial roots."""

    @given(st.integers(min_value=0, max_value=10_000), st.integers(min_value=1, max_value=6))
    def test_matches_characteristic_roots(self, seed, n):
        m = random_hermitian(seed, n)
        roots = np.sort(np.real(np.polynomial.polynomial.polyroots(np.poly(m)[::-1])))
        # a clear spectral gap keeps the iteration count small
        if n > 1 and roots[-1] - roots[-2] < 0.1 * np.linalg.norm(m):
            return
        eigenvalue, vector = hermitian_principal_eig(m)
        assert eigenvalue == pytest.approx(roots[-1], rel=1e-6, abs=1e-6)
        assert np.linalg.norm(vector) == pytest.approx(1.0)
        assert np.linalg.norm(m @ vector - eigenvalue * vector) <= 1e-9 * np.linalg.norm(m) * 10

    def test_identity(self):
        eigenvalue, vector = hermitian_principal_eig(np.eye(3))
        assert eigenvalue == pytest.approx(1.0)
        assert np.linalg.norm(vector) == pytest.approx(1.0)

    def test_zero_matrix(self):
        eigenvalue, _ = hermitian_principal_eig(np.zeros((3, 3)))
        assert eigenvalue == 0.0

    def test_rank_one(self):
        a = np.array([1.0, 1j, -1.0])
        eigenvalue, vector = hermitian_principal_eig(np.outer(a, a.conj()))
        assert eigenvalue == pytest.approx(3.0)
        assert abs(np.vdot(a, vector)) == pytest.approx(np.sqrt(3.0))

    def test_non_hermitian_rejected(self):
        with pytest.raises(InvalidInputError):
            hermitian_principal_eig(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_iteration_cap(self):
        with pytest.raises(ConvergenceError) as info:
            hermitian_principal_eig(np.diag([2.0, 1.0]), tol=1e-15, max_iter=1)
        assert info.value.iterate is not None
        assert info.value.residual > 0


class TestPsdFactor:
    def test_reconstructs_full_rank(self):
        x = standard_complex_normal(RngStream(1).generator(), (4, 4))
        cov = x @ x.conj().T
        factor = psd_factor(cov)
        assert np.allclose(factor @ factor.conj().T, cov)

    def test_rank_one(self):
        a = np.array([1.0, 2j, -1.0])
        cov = np.outer(a, a.conj())
        factor = psd_factor(cov)
        assert np.allclose(factor @ factor.conj().T, cov)

    def test_nearly_rank_one_relaxation_covariance(self):
        # unit rows clustered around one direction, as a settled relaxation factor gives
        generator = RngStream(3).generator()
        rows = np.ones((9, 1)) @ standard_complex_normal(generator, (1, 3))
        rows = rows + 1e-3 * standard_complex_normal(generator, (9, 3))
        rows /= np.linalg.norm(rows, axis=1, keepdims=True)
        cov = rows @ rows.conj().T
        factor = psd_factor(cov)
        assert np.allclose(factor @ factor.conj().T, cov, atol=1e-12)

    def test_indefinite_rejected(self):
        with pytest.raises(InvalidInputError):
            psd_factor(np.diag([1.0, -1.0]))


class TestSampleComplexGaussian:
    def test_empirical_covariance(self):
        cov = np.array([[2.0, 0.5j], [-0.5j, 1.0]])
        draws = sample_complex_gaussian(cov, RngStream(2), num_samples=200_000)
        empirical = draws.T @ draws.conj() / draws.shape[0]
        assert np.allclose(empirical, cov, atol=0.03)

    def test_circular(self):
        draws = sample_complex_gaussian(np.eye(2), RngStream(2), num_samples=200_000)
        pseudo = draws.T @ draws / draws.shape[0]
        assert np.allclose(pseudo, 0.0, atol=0.02)

    def test_zero_covariance_gives_zeros(self):
        assert np.all(sample_complex_gaussian(np.zeros((3, 3)), RngStream(0), num_samples=5) == 0)

    def test_single_vector_shape(self):
        assert sample_complex_gaussian(np.eye(3), RngStream(0)).shape == (3,)

    def test_deterministic(self):
        a = sample_complex_gaussian(np.eye(2), RngStream(9), num_samples=3)
        b = sample_complex_gaussian(np.eye(2), RngStream(9), num_samples=3)
        assert np.array_equal(a, b)


class TestSampleFromFactor:
    def test_empirical_covariance_of_a_tall_factor(self):
        factor = np.array([[1.0, 0.0], [0.5j, 1.0], [1.0, -1.0]])
        draws = sample_from_factor(factor, RngStream(4), num_samples=200_000)
        empirical = draws.T @ draws.conj() / draws.shape[0]
        assert np.allclose(empirical, factor @ factor.conj().T, atol=0.05)

    def test_rank_one_factor_stays_on_its_line(self):
        column = np.array([[1.0], [1j], [-2.0]])
        draws = sample_from_factor(column, RngStream(1), num_samples=10)
        assert draws.shape == (10, 3)
        assert np.allclose(draws[:, 1], 1j * draws[:, 0])
        assert np.allclose(draws[:, 2], -2.0 * draws[:, 0])
