"""Quadrature-algebra tests: Heisenberg bound, angle map, exact-engine checks."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from twinbeam import quadratures as quad
from twinbeam import spectra
from twinbeam.errors import TruncationError, ValidationError


def two_mode_squeezed_cov(r: float) -> np.ndarray:
    """Valid covariance with Var(X_a - X_b) = e^{-2r}, minimum uncertainty."""
    ch, sh = np.cosh(2 * r) / 2, np.sinh(2 * r) / 2
    cov = np.diag([ch, ch, ch, ch])
    cov[0, 2] = cov[2, 0] = sh  # X_a X_b correlated
    cov[1, 3] = cov[3, 1] = -sh  # P_a P_b anticorrelated
    return cov


class TestCovarianceValidity:
    def test_vacuum_is_valid(self):
        quad.validate_covariance(quad.vacuum_covariance())

    def test_asymmetric_matrix_rejected(self):
        cov = quad.vacuum_covariance().copy()
        cov[0, 1] = 0.3
        with pytest.raises(ValidationError):
            quad.validate_covariance(cov)

    def test_classically_correlated_x_without_p_penalty_is_invalid(self):
        # correlating X alone at vacuum diagonals violates the uncertainty bound
        cov = quad.vacuum_covariance().copy()
        cov[0, 2] = cov[2, 0] = 0.3
        with pytest.raises(ValidationError):
            quad.validate_covariance(cov)

    def test_below_vacuum_uncorrelated_is_invalid(self):
        with pytest.raises(ValidationError):
            quad.validate_covariance(np.eye(4) * 0.3)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_random_symplectic_covariances_valid(self, seed):
        rng = np.random.default_rng(seed)
        cov = quad.random_valid_covariance(rng, noise_scale=0.2 if seed % 2 else 0.0)
        quad.validate_covariance(cov)


class TestDifferenceStds:
    def test_vacuum_gives_unity(self):
        stats = quad.quadrature_difference_stds(quad.QuadratureState(0, 0))
        assert stats.dx_minus == pytest.approx(1.0, abs=1e-12)
        assert stats.dp_minus == pytest.approx(1.0, abs=1e-12)
        assert stats.heisenberg_product == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("r", [0.2, 1.0, 2.5, 4.0])
    def test_perfect_correlation_limit(self, r):
        stats = quad.quadrature_difference_stds(quad.QuadratureState(1, 1, two_mode_squeezed_cov(r)))
        assert stats.dx_minus == pytest.approx(np.exp(-r), rel=1e-10)
        assert stats.dp_minus == pytest.approx(np.exp(r), rel=1e-10)
        # dX_minus -> 0 while the product stays at the bound

    def test_opo_bridge_matches_model(self):
        for u in (0.25, 1.0, 3.0):
            for xi in (0.3, 0.72, 1.0):
                cov = spectra.opo_quadrature_covariance(u, xi)
                stats = quad.quadrature_difference_stds(quad.QuadratureState(1, 1, cov))
                assert stats.dx_minus**2 == pytest.approx(
                    spectra.intensity_diff_spectrum(u, xi), rel=1e-12
                )
                assert stats.dp_minus**2 == pytest.approx(
                    spectra.phase_diff_spectrum(u, xi), rel=1e-12
                )

    def test_heisenberg_property_seeded_sweep(self):
        rng = np.random.default_rng(2024)
        for _ in range(300):
            cov = quad.random_valid_covariance(rng, noise_scale=0.3 * rng.random())
            stats = quad.quadrature_difference_stds(quad.QuadratureState(1, 1, cov))
            assert stats.heisenberg_product >= 1.0 - 1e-9


class TestNumberDifferenceStd:
    def test_prefactor_pinned_by_coherent_statistics(self):
        # independent Poisson beams: exact Var(N_-) = 2 |alpha|^2
        alpha = 1.7
        got = quad.number_difference_std(quad.QuadratureState(alpha, alpha), 0.0)
        assert got == pytest.approx(np.sqrt(2.0) * alpha, rel=1e-12)
        assert quad.KAPPA == pytest.approx(np.sqrt(2.0))

    def test_squeezed_input_reduced_at_zero_angle(self):
        cov = spectra.opo_quadrature_covariance(0.5, 0.72)
        state = quad.QuadratureState(2, 2, cov)
        shot = quad.number_difference_std(quad.QuadratureState(2, 2), 0.0)
        squeezed = quad.number_difference_std(state, 0.0)
        anti = quad.number_difference_std(state, np.pi / 8)
        assert squeezed < shot < anti
        # ratio to shot noise reproduces the quadrature stds
        stats = quad.quadrature_difference_stds(state)
        assert squeezed / shot == pytest.approx(stats.dx_minus, rel=1e-12)
        assert anti / shot == pytest.approx(stats.dp_minus, rel=1e-12)

    def test_quarter_angle_equals_zero_angle(self):
        rng = np.random.default_rng(9)
        cov = quad.random_valid_covariance(rng)
        state = quad.QuadratureState(1.3, 1.3, cov)
        assert quad.number_difference_std(state, np.pi / 4) == pytest.approx(
            quad.number_difference_std(state, 0.0), rel=1e-12
        )

    @settings(max_examples=40, deadline=None)
    @given(st.integers(min_value=0, max_value=10_000))
    def test_swap_property(self, seed):
        # exchanging the X and P blocks swaps the roles of the two angles
        rng = np.random.default_rng(seed)
        cov = quad.random_valid_covariance(rng)
        perm = np.array([1, 0, 3, 2])
        swapped = cov[np.ix_(perm, perm)]
        state = quad.QuadratureState(1.0, 1.0, cov)
        state_swapped = quad.QuadratureState(1.0, 1.0, swapped)
        assert quad.number_difference_std(state, np.pi / 8) == pytest.approx(
            quad.number_difference_std(state_swapped, 0.0), rel=1e-10
        )

    def test_unequal_means_require_flag(self):
        state = quad.QuadratureState(2.0, 1.0)
        with pytest.raises(ValidationError):
            quad.number_difference_std(state, 0.0)

    def test_generalized_formula_matches_poisson_statistics(self):
        # exact for coherent beams: Var(N_-) = |alpha|^2 + |beta|^2
        alpha, beta = 2.0, 1.0 + 0.5j
        got = quad.number_difference_std(
            quad.QuadratureState(alpha, beta), 0.0, allow_unequal_means=True
        )
        assert got == pytest.approx(np.sqrt(abs(alpha) ** 2 + abs(beta) ** 2), rel=1e-12)


class TestCrossCheck:
    def test_zero_mean_field_degenerate_case(self):
        report = quad.cross_check_against_fock(0.0, cutoff=8)
        assert report.exact == (0.0, 0.0, 0.0)
        assert report.linearized == (0.0, 0.0, 0.0)
        assert report.max_relative_error == 0.0

    def test_agreement_at_vacuum_covariance(self):
        report = quad.cross_check_against_fock(2.0, cutoff=36)
        assert report.max_relative_error < 1e-9
        for value in report.exact:
            assert value == pytest.approx(np.sqrt(2.0) * 2.0, rel=1e-9)

    def test_convergence_with_brightness(self):
        # discrepancy shrinks (to the numerical floor) as the beams brighten
        floor = 1e-9
        errors = [
            max(quad.cross_check_against_fock(a, cutoff=c).max_relative_error, floor)
            for a, c in ((1.0, 20), (2.0, 36), (3.0, 56))
        ]
        assert errors[0] >= errors[1] >= errors[2]
        assert errors[2] < 0.05

    def test_excessive_leakage_rejected(self):
        with pytest.raises(TruncationError), pytest.warns():
            quad.cross_check_against_fock(2.0, cutoff=16)  # Poisson(4) tail above 1e-8
