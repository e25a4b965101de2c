"""Tests for TDMA multi-user rates and the element-split search."""

import numpy as np
import pytest

from src.core.errors import InvalidInputError
from src.core.matrix_rates import matrix_link_snrs
from src.core.multiuser_adaptive import (
    UserLinkGains,
    allocate_elements_search,
    rates_pirs_multiuser,
    rates_single_airs_multiuser,
    rates_user_adaptive,
    user_link_gains,
)
from src.core.numerics import RngStream
from src.core.single_user import distributed_rates, pirs_rates, single_airs_rates
from src.core.state import AirsSide, SystemParams
from src.experiments.placement import place_users


@pytest.fixture
def placed(params):
    return params.with_users(place_users(RngStream(11), params, count=4))


class TestUserLinkGains:
    def test_center_user_sees_slant_and_vertical_links(self, params):
        gains = user_link_gains(params)
        assert gains.h_u_sq[0] == pytest.approx(params.h2_sq)
        assert gains.h_d_sq[0] == pytest.approx(params.h1_sq)

    def test_mismatched_shapes_rejected(self):
        with pytest.raises(InvalidInputError):
            UserLinkGains(np.ones(2), np.ones(3))

    def test_nonpositive_rejected(self):
        with pytest.raises(InvalidInputError):
            UserLinkGains(np.array([1.0, 0.0]), np.ones(2))


class TestUserAdaptive:
    def test_single_user_reduces_to_closed_form(self, params):
        rates = rates_user_adaptive(params, user_link_gains(params), 60, 40)
        reference = distributed_rates(params, 60, 40)
        assert rates.wsr == pytest.approx(reference.wsr, rel=1e-12)

    def test_duplicated_users_share_the_slot(self, params):
        # K identical users: each gets 1/K of the single-user rate, so the sum is unchanged
        users = params.with_users([params.geometry.user_positions[0]] * 3)
        rates = rates_user_adaptive(users, user_link_gains(users), 60, 40)
        assert rates.r_u.shape == (3,)
        assert rates.wsr == pytest.approx(distributed_rates(params, 60, 40).wsr, rel=1e-12)

    def test_split_must_use_every_element(self, placed):
        with pytest.raises(InvalidInputError):
            rates_user_adaptive(placed, user_link_gains(placed), 50, 49)

    def test_link_rates_sum_users(self, placed):
        rates = rates_user_adaptive(placed, user_link_gains(placed), 50, 50)
        link = rates.as_link_rates()
        assert link.ul_rate == pytest.approx(float(np.sum(rates.r_u)))
        assert link.wsr == pytest.approx(rates.wsr)


class TestElementSearch:
    def test_matches_brute_force(self, placed):
        gains = user_link_gains(placed)
        n = placed.n_total
        values = [rates_user_adaptive(placed, gains, n - n_d, n_d).wsr for n_d in range(1, n)]
        result = allocate_elements_search(placed, gains)
        assert result.n_d == 1 + int(np.argmax(values))
        assert result.wsr_bpshz == pytest.approx(max(values))

    def test_keeps_both_surfaces(self, placed):
        result = allocate_elements_search(placed.replace(epsilon=0.0), user_link_gains(placed))
        assert result.n_d == 1
        assert result.n_u == placed.n_total - 1


class TestBaselines:
    @pytest.mark.parametrize("side", list(AirsSide))
    def test_single_airs_single_user(self, params, side):
        assert rates_single_airs_multiuser(params, side).wsr == pytest.approx(
            single_airs_rates(params, side).wsr, rel=1e-12
        )

    def test_passive_single_user(self, params):
        assert rates_pirs_multiuser(params).wsr == pytest.approx(pirs_rates(params).wsr, rel=1e-12)

    def test_adaptive_beats_baselines(self, placed):
        gains = user_link_gains(placed)
        adaptive = allocate_elements_search(placed, gains).wsr_bpshz
        for side in AirsSide:
            assert adaptive >= rates_single_airs_multiuser(placed, side).wsr
        assert adaptive >= rates_pirs_multiuser(placed).wsr


class TestUserAdaptiveAgainstMatrices:
    def test_every_placed_user_matches_the_matrix_model(self, placed):
        rates = rates_user_adaptive(placed, user_link_gains(placed), 60, 40)
        geometry = placed.geometry
        k = placed.k_users
        for index, position in enumerate(geometry.user_positions):
            snr_u, snr_d = matrix_link_snrs(
                placed, geometry.bs_airs_position, geometry.user_airs_position, position, 60, 40
            )
            assert rates.r_u[index] == pytest.approx(np.log2(1 + snr_u) / k, rel=1e-9)
            assert rates.r_d[index] == pytest.approx(np.log2(1 + snr_d) / k, rel=1e-9)

    def test_empty_uplink_surface(self, placed):
        rates = rates_user_adaptive(placed, user_link_gains(placed), 0, placed.n_total)
        assert np.all(rates.r_u == 0.0)


class TestDownlinkGainScaling:
    """Strengthening one user's downlink never shrinks the downlink surface or the WSR."""

    @pytest.mark.parametrize("user", [0, 3])
    def test_split_and_rate_do_not_decrease(self, placed, user):
        gains = user_link_gains(placed)
        previous_n_d, previous_wsr = 0, -np.inf
        for factor in (0.01, 0.1, 1.0, 10.0, 100.0):
            h_d_sq = gains.h_d_sq.copy()
            h_d_sq[user] *= factor
            result = allocate_elements_search(placed, UserLinkGains(gains.h_u_sq, h_d_sq))
            assert result.n_d >= previous_n_d
            assert result.wsr_bpshz >= previous_wsr
            previous_n_d, previous_wsr = result.n_d, result.wsr_bpshz


class TestSearchAtHighSnr:
    @pytest.mark.parametrize("epsilon", [0.2, 0.4, 0.6, 0.8])
    @pytest.mark.parametrize("n", [32, 64, 128])
    def test_near_the_weighted_split(self, epsilon, n):
        base = SystemParams.default(p_f_mw=10.0, p_u_mw=100.0, p_b_mw=100.0, epsilon=epsilon, n_total=n)
        params = base.with_users(place_users(RngStream(5), base, count=4))
        result = allocate_elements_search(params, user_link_gains(params))
        assert abs(result.n_d - round(epsilon * n)) <= 2
