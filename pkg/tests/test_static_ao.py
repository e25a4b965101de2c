"""Tests for the static AIRS beamforming blocks and the alternating optimization."""

import numpy as np
import pytest
from scipy.optimize import minimize_scalar

from src.core.errors import InfeasibleError, InvalidInputError
from src.core.numerics import RngStream, standard_complex_normal, unit_modulus
from src.core.qcqp_solver import solve_sdr
from src.core.single_user import downlink_snr_closed_form, uplink_snr_closed_form
from src.core.state import AuxiliaryDuals, QcqpMethod, SystemParams
from src.core.static_ao import (
    AoOptions,
    alpha_downlink_update,
    alpha_uplink_update,
    assemble_quadratic_form,
    build_static_channels,
    complete_blocks,
    constraint_slacks,
    duals_eta_update,
    duals_mu_update,
    initial_phase,
    is_feasible,
    ldt_objective,
    mrc_receive_update,
    phase_grid_search,
    phase_inner_loop,
    qt_objective,
    rates_static,
    run_alternating_optimization,
    surrogate_value,
    transmit_update,
    uplink_sinrs,
    with_user_powers,
)
from src.experiments.placement import place_users


def random_phase(seed, n):
    return unit_modulus(standard_complex_normal(RngStream(seed).generator(), n))


@pytest.fixture
def started(small_static):
    params, channels = small_static
    return params, channels, complete_blocks(random_phase(3, channels.n_s), channels, params)


def all_duals(state, channels, params):
    mu_bar, mu_tilde = duals_mu_update(state, channels, params)
    eta_bar, eta_tilde = duals_eta_update(state, channels, params, mu_bar, mu_tilde)
    return AuxiliaryDuals(mu_bar, mu_tilde, eta_bar, eta_tilde)


class TestStaticChannels:
    def test_half_the_elements_per_surface(self, small_static):
        params, channels = small_static
        assert channels.n_s == params.n_total // 2
        assert channels.h_u.shape == (2, channels.n_s)
        assert channels.g_d.matrix.shape == (channels.n_s, params.m)

    def test_odd_element_count_rejected(self):
        with pytest.raises(InvalidInputError):
            build_static_channels(SystemParams.default(n_total=9))


class TestSingleUserRates:
    """With one user and aligned phases the static rates meet the closed forms with N/2 elements."""

    def test_downlink_priority(self, single_static):
        params, channels = single_static
        params = params.replace(epsilon=0.7)
        state = complete_blocks(initial_phase(channels, params), channels, params)
        expected = downlink_snr_closed_form(params, channels.n_s, params.h2_sq, params.h1_sq)
        assert rates_static(state, channels, params).r_d[0] == pytest.approx(np.log2(1 + expected), rel=1e-9)

    def test_uplink_priority(self, single_static):
        params, channels = single_static
        params = params.replace(epsilon=0.2)
        state = complete_blocks(initial_phase(channels, params), channels, params)
        expected = uplink_snr_closed_form(params, channels.n_s, params.h1_sq, params.h2_sq)
        assert rates_static(state, channels, params).r_u[0] == pytest.approx(np.log2(1 + expected), rel=1e-9)


class TestReceiveUpdate:
    def test_mrc_beats_random_combiners(self, started):
        params, channels, state = started
        best = uplink_sinrs(state, channels, params)
        generator = RngStream(5).generator()
        for _ in range(50):
            combiner = standard_complex_normal(generator, (channels.k_users, channels.m))
            combiner /= np.linalg.norm(combiner, axis=1, keepdims=True)
            assert np.all(uplink_sinrs(state.replace(u=combiner), channels, params) <= best * (1 + 1e-9))

    def test_unit_norm(self, started):
        _, channels, state = started
        u = mrc_receive_update(channels, state.phase)
        assert np.allclose(np.linalg.norm(u, axis=1), 1.0)


class TestTransmitUpdate:
    def test_one_constraint_is_tight(self, started):
        params, channels, state = started
        alpha_d = 0.5 * state.alpha_d
        w = transmit_update(channels, state.phase, alpha_d, params, 0)
        bs_slack = (params.p_b_mw - np.linalg.norm(w) ** 2) / params.p_b_mw
        load = alpha_d**2 * (
            np.linalg.norm(state.phase * (channels.g_d.matrix @ w)) ** 2 + params.sigma_f_mw * channels.n_s
        )
        amplification_slack = (params.p_f_mw - load) / params.p_f_mw
        assert min(bs_slack, amplification_slack) == pytest.approx(0.0, abs=1e-9)
        assert bs_slack >= -1e-9
        assert amplification_slack >= -1e-9

    def test_beats_random_feasible_beamformers(self, started):
        params, channels, state = started
        alpha_d = state.alpha_d
        q = channels.g_d.matrix.conj().T @ (state.phase.conj() * channels.h_d[1])
        best = abs(np.vdot(q, transmit_update(channels, state.phase, alpha_d, params, 1))) ** 2
        headroom = params.p_f_mw - alpha_d**2 * params.sigma_f_mw * channels.n_s
        generator = RngStream(6).generator()
        for _ in range(50):
            direction = standard_complex_normal(generator, channels.m)
            direction /= np.linalg.norm(direction)
            load = alpha_d**2 * np.linalg.norm(channels.g_d.matrix @ direction) ** 2
            scale = np.sqrt(min(params.p_b_mw, headroom / load))
            assert abs(np.vdot(q, scale * direction)) ** 2 <= best * (1 + 1e-9)

    def test_no_headroom_rejected(self, started):
        params, channels, state = started
        alpha_d = 2.0 * np.sqrt(params.p_f_mw / (params.sigma_f_mw * channels.n_s))
        with pytest.raises(InfeasibleError):
            transmit_update(channels, state.phase, alpha_d, params, 0)


class TestAmplificationUpdates:
    def test_uplink_factor_maximizes_rate(self, started):
        params, channels, state = started
        alpha_max = alpha_uplink_update(channels, state.phase, params)

        def uplink_rate(alpha):
            return float(np.sum(rates_static(state.replace(alpha_u=alpha), channels, params).r_u))

        golden = minimize_scalar(lambda a: -uplink_rate(a), bounds=(0.0, alpha_max), method="bounded")
        assert uplink_rate(alpha_max) >= -golden.fun - 1e-12
        assert constraint_slacks(state.replace(alpha_u=alpha_max), channels, params)[
            "uplink_amplification"
        ] == pytest.approx(0.0, abs=1e-9)

    def test_downlink_factor_maximizes_rate(self, started):
        params, channels, state = started
        alpha_max = alpha_downlink_update(channels, state.phase, state.w, params)

        def downlink_rate(alpha):
            return float(np.sum(rates_static(state.replace(alpha_d=alpha), channels, params).r_d))

        golden = minimize_scalar(lambda a: -downlink_rate(a), bounds=(0.0, alpha_max), method="bounded")
        assert downlink_rate(alpha_max) >= -golden.fun - 1e-12

    def test_downlink_factor_without_signal(self, started):
        params, channels, state = started
        alpha = alpha_downlink_update(channels, state.phase, np.zeros_like(state.w), params)
        assert alpha == pytest.approx(np.sqrt(params.p_f_mw / (params.sigma_f_mw * channels.n_s)))

    def test_user_powers_above_budget_rejected(self, started):
        params, channels, state = started
        with pytest.raises(InvalidInputError):
            alpha_uplink_update(channels, state.phase, params, powers=2 * params.p_u_mw)


class TestSurrogates:
    def test_lagrangian_dual_is_tight(self, started):
        params, channels, state = started
        mu_bar, mu_tilde = duals_mu_update(state, channels, params)
        wsr = rates_static(state, channels, params).wsr
        assert ldt_objective(state, channels, params, mu_bar, mu_tilde) == pytest.approx(wsr, rel=1e-12)

    def test_quadratic_transform_is_tight(self, started):
        params, channels, state = started
        duals = all_duals(state, channels, params)
        ldt = ldt_objective(state, channels, params, duals.mu_bar, duals.mu_tilde)
        assert qt_objective(state, channels, params, duals) == pytest.approx(ldt, rel=1e-12)

    def test_sinr_auxiliaries_maximize_the_dual(self, started):
        params, channels, state = started
        mu_bar, mu_tilde = duals_mu_update(state, channels, params)
        best = ldt_objective(state, channels, params, mu_bar, mu_tilde)
        for factor in (0.5, 0.9, 1.1, 2.0):
            assert ldt_objective(state, channels, params, factor * mu_bar, mu_tilde) <= best
            assert ldt_objective(state, channels, params, mu_bar, factor * mu_tilde) <= best

    def test_transform_auxiliaries_maximize_the_surrogate(self, started):
        params, channels, state = started
        duals = all_duals(state, channels, params)
        best = qt_objective(state, channels, params, duals)
        for shift in (0.9, 1.1, 1j, -1.0):
            shifted = AuxiliaryDuals(duals.mu_bar, duals.mu_tilde, shift * duals.eta_bar, duals.eta_tilde)
            assert qt_objective(state, channels, params, shifted) <= best

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_quadratic_form_reproduces_surrogate(self, started, seed):
        params, channels, state = started
        duals = all_duals(state, channels, params)
        qf = assemble_quadratic_form(state, channels, duals, params)
        phase = random_phase(100 + seed, channels.n_s)
        expected = qt_objective(state.replace(phase=phase), channels, params, duals)
        assert surrogate_value(qf, phase, state, channels, duals, params) == pytest.approx(expected, rel=1e-9)


class TestInnerLoop:
    def test_trace_is_monotone(self, started):
        params, channels, state = started
        result = phase_inner_loop(state, channels, params)
        assert np.all(np.diff(result.trace) >= 0.0)
        assert result.trace[-1] == pytest.approx(rates_static(state.replace(phase=result.phase), channels, params).wsr)
        assert max(result.ldt_gaps) <= 1e-9 * (1 + result.trace[-1])

    def test_iteration_cap(self, started):
        params, channels, state = started
        result = phase_inner_loop(state, channels, params, tol=0.0, max_iter=1)
        assert result.iterations == 1
        assert len(result.trace) == 2

    def test_restart_never_lowers_the_rate(self, started):
        params, channels, state = started
        first = phase_inner_loop(state, channels, params)
        second = phase_inner_loop(state.replace(phase=first.phase), channels, params)
        assert second.trace[0] == pytest.approx(first.trace[-1])
        assert second.trace[-1] >= first.trace[-1]

    def test_sdr_method(self, started):
        params, channels, state = started
        result = phase_inner_loop(state, channels, params, method=QcqpMethod.SDR, num_randomizations=20)
        assert np.all(np.diff(result.trace) >= 0.0)
        assert np.allclose(np.abs(result.phase), 1.0)

    def test_failing_sdr_falls_back_to_coordinate_ascent(self, started, monkeypatch, caplog):
        params, channels, state = started

        def broken_sdr(*args, **kwargs):
            raise InvalidInputError("cov is not positive semidefinite")

        monkeypatch.setattr("src.core.static_ao.solve_sdr", broken_sdr)
        with caplog.at_level("WARNING", logger="src.core.static_ao"):
            relaxed = phase_inner_loop(state, channels, params, method=QcqpMethod.SDR)
        ascent = phase_inner_loop(state, channels, params)
        assert "falling back to coordinate ascent" in caplog.text
        assert relaxed.trace == pytest.approx(ascent.trace)


class TestAlternatingOptimization:
    def test_feasible_and_monotone(self, small_static):
        params, channels = small_static
        result = run_alternating_optimization(params, channels)
        assert is_feasible(result.state, channels, params)
        assert np.all(np.diff(result.outer_trace) >= 0.0)
        assert result.converged
        assert result.wsr == pytest.approx(rates_static(result.state, channels, params).wsr)
        assert max(result.qt_gaps) <= 1e-9 * (1 + result.wsr)

    def test_deterministic(self, small_static):
        params, channels = small_static
        a = run_alternating_optimization(params, channels)
        b = run_alternating_optimization(params, channels)
        assert a.wsr == b.wsr
        assert np.array_equal(a.state.phase, b.state.phase)

    def test_improves_on_its_start(self, small_static):
        params, channels = small_static
        start = rates_static(complete_blocks(initial_phase(channels, params), channels, params), channels, params)
        assert run_alternating_optimization(params, channels).wsr >= start.wsr

    def test_callback_sees_every_iteration(self, small_static):
        params, channels = small_static
        seen = []
        result = run_alternating_optimization(params, channels, on_iteration=lambda i, wsr: seen.append(i))
        assert seen == list(range(1, result.iterations + 1))

    def test_loose_tolerance_stops_after_one_iteration(self, small_static):
        params, channels = small_static
        result = run_alternating_optimization(params, channels, AoOptions(tol=1e9))
        assert result.iterations == 1
        assert result.converged

    def test_outer_iteration_cap(self, small_static):
        params, channels = small_static
        result = run_alternating_optimization(params, channels, AoOptions(tol=1e-300, max_outer=1))
        assert result.iterations == 1
        assert len(result.outer_trace) == 2
        assert result.converged == (result.outer_trace[1] - result.outer_trace[0] < 1e-300)

    def test_raising_user_power_helps_a_fixed_state(self, small_static):
        params, channels = small_static
        state = run_alternating_optimization(params, channels).state
        full = rates_static(state, channels, params).wsr
        for scale in (0.25, 0.5, 0.9):
            reduced = with_user_powers(state, channels, params, scale * params.p_u_mw)
            assert is_feasible(reduced, channels, params)
            assert rates_static(reduced, channels, params).wsr <= full

    def test_within_five_percent_of_phase_grid(self, single_static):
        params, channels = single_static
        _, best = phase_grid_search(channels, params, points_per_element=8)
        assert run_alternating_optimization(params, channels).wsr >= 0.95 * best

    @pytest.mark.parametrize("scale", [0.25, 0.5, 0.75])
    def test_full_user_power_is_best_after_reoptimizing(self, small_static, scale):
        params, channels = small_static
        full = run_alternating_optimization(params, channels).wsr
        common = run_alternating_optimization(params, channels, AoOptions(user_powers=scale * params.p_u_mw))
        single = run_alternating_optimization(
            params, channels, AoOptions(user_powers=(scale * params.p_u_mw, params.p_u_mw))
        )
        for reduced in (common, single):
            assert is_feasible(reduced.state, channels, params)
            assert reduced.wsr <= full + 1e-9 * (1 + full)


def four_user_instance(seed, n_total):
    base = SystemParams.default(m=4, n_total=n_total)
    params = base.with_users(place_users(RngStream(seed), base, count=4))
    return params, build_static_channels(params)


class TestFourUserRuns:
    @pytest.mark.parametrize("method", list(QcqpMethod))
    @pytest.mark.parametrize("n_total", [16, 32])
    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_feasible_monotone_and_converged(self, seed, n_total, method):
        params, channels = four_user_instance(seed, n_total)
        result = run_alternating_optimization(params, channels, AoOptions(method=method))
        assert result.converged
        assert result.iterations <= 50
        assert is_feasible(result.state, channels, params)
        assert np.all(np.diff(result.outer_trace) >= 0.0)
        for trace in result.inner_traces:
            assert np.all(np.diff(trace) >= 0.0)
        assert max(result.ldt_gaps) <= 1e-9 * (1 + result.wsr)
        assert max(result.qt_gaps) <= 1e-9 * (1 + result.wsr)

    @pytest.mark.parametrize("seed", [0, 1])
    def test_phase_solvers_agree(self, seed):
        params, channels = four_user_instance(seed, 16)
        ascent = run_alternating_optimization(params, channels, AoOptions(method=QcqpMethod.COORDINATE_ASCENT))
        relaxed = run_alternating_optimization(params, channels, AoOptions(method=QcqpMethod.SDR))
        assert relaxed.wsr >= 0.95 * ascent.wsr
        assert ascent.wsr >= 0.95 * relaxed.wsr

    def test_sdr_on_an_assembled_phase_problem(self):
        params, channels = four_user_instance(2, 32)
        state = complete_blocks(initial_phase(channels, params), channels, params)
        qf = assemble_quadratic_form(state, channels, all_duals(state, channels, params), params)
        result = solve_sdr(qf, rng=RngStream(0))
        assert np.allclose(np.abs(result.v), 1.0)
        assert result.objective <= result.relaxation_value + 1e-6 * (1 + abs(result.relaxation_value))