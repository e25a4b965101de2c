"""Tests for the single-user closed forms and element allocation."""

import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from src.core.errors import BoundaryError
from src.core.matrix_rates import matrix_link_snrs
from src.core.numerics import RngStream
from src.core.single_user import (
    allocate_elements_exhaustive,
    allocate_elements_fixed,
    allocate_elements_near_optimal,
    allocate_elements_optimal,
    best_deployment,
    derivative_proxy,
    distributed_rates,
    pirs_hop_gains,
    pirs_rates,
    single_airs_rates,
    wsr_coefficients,
    wsr_distributed,
    wsr_pirs_baseline,
    wsr_single_airs,
)
from src.core.state import AirsSide, DeploymentScheme, SystemParams
from src.experiments.selftest import random_scenario

seeds = st.integers(min_value=0, max_value=2**32 - 1)


class TestWsrCoefficients:
    def test_thresholds_ordered(self, params):
        coeffs = wsr_coefficients(params)
        assert 0.0 < coeffs.w1 < coeffs.w2 < 1.0

    def test_signal_coefficient(self, params):
        coeffs = wsr_coefficients(params)
        expected = params.m * params.p_f_mw * params.h1_sq * params.h2_sq
        assert coeffs.f1 == pytest.approx(expected)

    @pytest.mark.parametrize("name", ["m", "n_total", "p_f_mw", "p_u_mw", "p_b_mw"])
    def test_gap_widens_when_doubled(self, params, name):
        base = wsr_coefficients(params)
        doubled = wsr_coefficients(params.replace(**{name: 2 * getattr(params, name)}))
        assert doubled.w2 - doubled.w1 > base.w2 - base.w1


class TestClosedFormsAgainstMatrices:
    """Closed-form SNRs against LoS matrices built from node positions."""

    @given(seeds)
    def test_distributed(self, seed):
        params = random_scenario(RngStream(seed).generator())
        geometry = params.geometry
        n_u = params.n_total // 3
        n_d = params.n_total - n_u
        rates = distributed_rates(params, n_u, n_d)
        snr_ul, snr_dl = matrix_link_snrs(
            params, geometry.bs_airs_position, geometry.user_airs_position,
            geometry.user_positions[0], n_u, n_d,
        )
        if n_u:
            assert rates.snr_ul[0] == pytest.approx(snr_ul, rel=1e-9)
        assert rates.snr_dl[0] == pytest.approx(snr_dl, rel=1e-9)

    @given(seeds, st.sampled_from(list(AirsSide)))
    def test_single_airs(self, seed, side):
        params = random_scenario(RngStream(seed).generator())
        geometry = params.geometry
        surface = geometry.bs_airs_position if side is AirsSide.BS_SIDE else geometry.user_airs_position
        n = params.n_total
        rates = single_airs_rates(params, side)
        snr_ul, snr_dl = matrix_link_snrs(params, surface, surface, geometry.user_positions[0], n, n)
        assert rates.snr_ul[0] == pytest.approx(snr_ul, rel=1e-9)
        assert rates.snr_dl[0] == pytest.approx(snr_dl, rel=1e-9)

    @given(seeds)
    def test_passive(self, seed):
        params = random_scenario(RngStream(seed).generator())
        geometry = params.geometry
        n = params.n_total
        rates = pirs_rates(params)
        snr_ul, snr_dl = matrix_link_snrs(
            params, geometry.pirs_position, geometry.pirs_position, geometry.user_positions[0], n, n,
            passive=True,
        )
        assert rates.snr_ul[0] == pytest.approx(snr_ul, rel=1e-9)
        assert rates.snr_dl[0] == pytest.approx(snr_dl, rel=1e-9)


class TestAllocation:
    @given(seeds)
    def test_threshold_rule_matches_exhaustive(self, seed):
        params = random_scenario(RngStream(seed).generator())
        optimal = allocate_elements_optimal(params)
        exhaustive = allocate_elements_exhaustive(params)
        assert optimal.n_d == exhaustive.n_d
        assert optimal.n_u + optimal.n_d == params.n_total
        assert optimal.wsr_bpshz == pytest.approx(exhaustive.wsr_bpshz, rel=1e-12)

    def test_below_first_threshold_gives_uplink_everything(self, params):
        coeffs = wsr_coefficients(params)
        result = allocate_elements_optimal(params.replace(epsilon=coeffs.w1 / 2))
        assert (result.n_u, result.n_d) == (params.n_total, 0)

    def test_above_second_threshold_gives_downlink_everything(self, params):
        coeffs = wsr_coefficients(params)
        result = allocate_elements_optimal(params.replace(epsilon=(coeffs.w2 + 1.0) / 2))
        assert (result.n_u, result.n_d) == (0, params.n_total)

    def test_interior_weight_splits_both_ways(self, params):
        result = allocate_elements_optimal(params)
        assert 0 < result.n_d < params.n_total
        assert result.n_d - 1 <= result.x_d_continuous <= result.n_d + 1

    def test_exhaustive_ties_go_to_smaller_downlink_share(self, params):
        # at epsilon 0 only the uplink counts, and every n_d > 0 is strictly worse
        result = allocate_elements_exhaustive(params.replace(epsilon=0.0))
        assert result.n_d == 0

    def test_derivative_proxy_vanishes_at_continuous_optimum(self, params):
        x_d = allocate_elements_optimal(params).x_d_continuous
        scale = abs(derivative_proxy(params, 0.0))
        assert derivative_proxy(params, x_d) == pytest.approx(0.0, abs=1e-9 * scale)
        assert derivative_proxy(params, x_d - 1.0) > 0
        assert derivative_proxy(params, x_d + 1.0) < 0

    def test_derivative_proxy_sign_matches_finite_difference(self, params):
        n = params.n_total
        for n_d in (5, 30, 60, 90):
            step = wsr_distributed(params, n - n_d - 1, n_d + 1) - wsr_distributed(params, n - n_d, n_d)
            assert (step > 0) == (derivative_proxy(params, n_d + 0.5) > 0)


class TestNearOptimal:
    def test_proportional_split(self):
        assert allocate_elements_near_optimal(0.25, 100) == pytest.approx(25.0)

    @pytest.mark.parametrize("epsilon", [0.0, 1.0])
    def test_boundary_weights_rejected(self, epsilon):
        with pytest.raises(BoundaryError):
            allocate_elements_near_optimal(epsilon, 100)

    @pytest.mark.parametrize("epsilon, n_d", [(0.0, 0), (1.0, 100)])
    def test_fixed_split_falls_back_at_boundaries(self, params, epsilon, n_d):
        assert allocate_elements_fixed(params.replace(epsilon=epsilon)).n_d == n_d

    def test_within_two_percent_at_high_snr(self):
        for epsilon, n in itertools.product((0.2, 0.4, 0.6, 0.8), (32, 64, 128)):
            params = SystemParams.default(p_f_mw=10.0, p_u_mw=100.0, p_b_mw=100.0, epsilon=epsilon, n_total=n)
            best = allocate_elements_exhaustive(params).wsr_bpshz
            assert allocate_elements_fixed(params).wsr_bpshz >= 0.98 * best


class TestDeployments:
    @pytest.mark.parametrize("n", range(20, 201, 20))
    def test_ordering_at_defaults(self, n):
        params = SystemParams.default(n_total=n)
        single = max(wsr_single_airs(params, AirsSide.BS_SIDE), wsr_single_airs(params, AirsSide.USER_SIDE))
        assert allocate_elements_optimal(params).wsr_bpshz >= single - 1e-12
        assert single >= wsr_pirs_baseline(params) - 1e-12

    def test_uplink_only_matches_bs_side(self, params):
        uplink = params.replace(epsilon=0.0)
        assert allocate_elements_optimal(uplink).wsr_bpshz == pytest.approx(
            wsr_single_airs(uplink, AirsSide.BS_SIDE), rel=1e-12
        )

    def test_downlink_only_matches_user_side(self, params):
        downlink = params.replace(epsilon=1.0)
        assert allocate_elements_optimal(downlink).wsr_bpshz == pytest.approx(
            wsr_single_airs(downlink, AirsSide.USER_SIDE), rel=1e-12
        )

    def test_best_deployment_at_defaults(self, params):
        scheme, wsr = best_deployment(params)
        assert scheme is DeploymentScheme.DISTRIBUTED
        assert wsr == pytest.approx(allocate_elements_optimal(params).wsr_bpshz)

    def test_best_deployment_skips_distributed_outside_thresholds(self, params):
        scheme, _ = best_deployment(params.replace(epsilon=0.0))
        assert scheme is not DeploymentScheme.DISTRIBUTED

    def test_passive_snr(self, params):
        g_a, g_b = pirs_hop_gains(params)
        assert g_a == pytest.approx(params.h1_sq)
        assert g_b == pytest.approx(params.h2_sq)
        expected = params.p_u_mw * params.m * params.n_total**2 * g_a * g_b / params.sigma_0_mw
        assert pirs_rates(params).snr_ul[0] == pytest.approx(expected)
