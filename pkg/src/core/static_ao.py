"""
Static AIRS Beamforming

One reflection phase vector shared by both AIRSs and by every user, with a
common amplification factor per direction. The two-layer alternating
optimization updates, in turn, the receive combiners (MRC), the transmit
beamformers, both amplification factors and, in an inner fractional
programming loop, the shared phases.

Phase subproblem convention: the QCQP variable is ``v = conj(phase)``, so the
effective uplink channel of user k is ``vᴴ a_k`` with
``a_k = conj(G_U u_k) ⊙ h_{U,k}`` and the downlink one is ``vᴴ c_k`` with
``c_k = conj(h_{D,k}) ⊙ (G_D w_k)``.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .channel import SINGLE_ANTENNA, ArraySpec, LosChannel, los_link
from .errors import (
    AirsError,
    ConvergenceError,
    DegenerateChannelError,
    InfeasibleError,
    InvalidInputError,
)
from .matrix_rates import (
    aligned_downlink_phase,
    aligned_uplink_phase,
    downlink_amplification,
    downlink_sinr,
    uplink_amplification,
    uplink_sinr,
)
from .numerics import RandomSource, RngStream, as_generator
from .qcqp_solver import QuadraticForm, solve_coordinate_ascent, solve_sdr
from .state import AuxiliaryDuals, LinkRates, QcqpMethod, StaticBeamState, SystemParams

logger = logging.getLogger(__name__)

FEASIBILITY_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class StaticChannels:
    """
    Channels of the static scheme.

    Attributes:
        g_u: BS to BS-side AIRS (N_s × M)
        g_d: BS to user-side AIRS (N_s × M)
        h_u: User k to BS-side AIRS, one row per user (K × N_s)
        h_d: User-side AIRS to user k, rows h with hᴴ the channel row (K × N_s)
    """

    g_u: LosChannel
    g_d: LosChannel
    h_u: np.ndarray
    h_d: np.ndarray

    def __post_init__(self) -> None:
        n_s, m = self.g_u.matrix.shape
        if self.g_d.matrix.shape != (n_s, m):
            raise InvalidInputError("both AIRSs must hold the same number of elements")
        if self.h_u.ndim != 2 or self.h_u.shape != self.h_d.shape or self.h_u.shape[1] != n_s:
            raise InvalidInputError("user channels must be K × N_s for both directions")

    @property
    def n_s(self) -> int:
        return self.g_u.matrix.shape[0]

    @property
    def m(self) -> int:
        return self.g_u.matrix.shape[1]

    @property
    def k_users(self) -> int:
        return self.h_u.shape[0]


@dataclass(frozen=True, eq=False)
class StaticRates:
    """
    Per-user TDMA rates of a static state.

    Attributes:
        r_u: Uplink rate of each user (1/K included)
        r_d: Downlink rate of each user (1/K included)
        epsilon: Downlink weight
    """

    r_u: np.ndarray
    r_d: np.ndarray
    epsilon: float

    @property
    def wsr(self) -> float:
        return float(np.sum((1.0 - self.epsilon) * self.r_u + self.epsilon * self.r_d))

    def as_link_rates(self) -> LinkRates:
        return LinkRates(float(np.sum(self.r_u)), float(np.sum(self.r_d)), self.epsilon)


@dataclass(frozen=True)
class AoOptions:
    """
    Alternating-optimization settings.

    Attributes:
        tol: Stop when an outer iteration gains less than this (bps/Hz)
        max_outer: Outer iteration cap
        method: Phase subproblem solver
        seed: Seed of the SDR random stream
        inner_tol: Inner-loop stopping gain (bps/Hz)
        max_inner: Inner iteration cap per outer iteration
        num_randomizations: SDR Gaussian candidates
        user_powers: Fixed user powers (scalar or per user); None means P_U for all
        initial_phase: Warm-start phase; None uses the link-priority start
    """

    tol: float = 1e-4
    max_outer: int = 50
    method: QcqpMethod = QcqpMethod.COORDINATE_ASCENT
    seed: int = 0
    inner_tol: float = 1e-6
    max_inner: int = 100
    num_randomizations: int = 200
    user_powers: Optional[Union[float, Sequence[float]]] = None
    initial_phase: Optional[np.ndarray] = field(default=None, compare=False)


@dataclass(frozen=True, eq=False)
class InnerLoopResult:
    """
    Attributes:
        phase: Accepted phase vector
        trace: True WSR after every inner iteration, starting value first
        ldt_gaps: |f1(μ_opt) − WSR| per iteration
        qt_gaps: |f2(μ, η_opt) − f1(μ)| per iteration
        iterations: Inner iterations performed
        rejected: Candidates discarded because they lowered the WSR
    """

    phase: np.ndarray
    trace: List[float]
    ldt_gaps: List[float]
    qt_gaps: List[float]
    iterations: int
    rejected: int


@dataclass(frozen=True, eq=False)
class AoResult:
    """
    Attributes:
        state: Best state found
        wsr: WSR of ``state``
        outer_trace: WSR after every outer iteration, initial value first
        inner_traces: Inner-loop WSR trace of every outer iteration
        ldt_gaps: Lagrangian-dual tightness gap of every inner iteration
        qt_gaps: Quadratic-transform tightness gap of every inner iteration
        iterations: Outer iterations performed
        converged: False when max_outer was reached first
    """

    state: StaticBeamState
    wsr: float
    outer_trace: List[float]
    inner_traces: List[List[float]]
    ldt_gaps: List[float]
    qt_gaps: List[float]
    iterations: int
    converged: bool


def build_static_channels(params: SystemParams) -> StaticChannels:
    """
    LoS channels with N/2 elements on each AIRS.

    Raises:
        InvalidInputError: If N is odd
    """
    if params.n_total % 2:
        raise InvalidInputError(f"static beamforming splits N evenly, got odd N={params.n_total}")
    geometry = params.geometry
    bs_array = ArraySpec.for_count(params.m)
    surface = ArraySpec.for_count(params.n_total // 2)
    bs = geometry.bs_position
    g_u = los_link(bs, geometry.bs_airs_position, bs_array, surface, params.beta)
    g_d = los_link(bs, geometry.user_airs_position, bs_array, surface, params.beta)
    h_u = np.array(
        [
            los_link(p, geometry.bs_airs_position, SINGLE_ANTENNA, surface, params.beta).as_column()
            for p in geometry.user_positions
        ]
    )
    h_d = np.array(
        [
            los_link(geometry.user_airs_position, p, surface, SINGLE_ANTENNA, params.beta).as_conjugate_row()
            for p in geometry.user_positions
        ]
    )
    return StaticChannels(g_u, g_d, h_u, h_d)


def _user_powers(params: SystemParams, k_users: int, powers=None) -> np.ndarray:
    if powers is None:
        return np.full(k_users, params.p_u_mw)
    values = np.broadcast_to(np.asarray(powers, dtype=float), (k_users,)).copy()
    if np.any(values <= 0) or np.any(values > params.p_u_mw * (1 + FEASIBILITY_TOLERANCE)):
        raise InvalidInputError("user powers must lie in (0, P_U]")
    return values


# ═══════════════════════════════════════════════════════════════════════════
# RATES
# ═══════════════════════════════════════════════════════════════════════════


def uplink_sinrs(state: StaticBeamState, channels: StaticChannels, params: SystemParams) -> np.ndarray:
    return uplink_sinr(
        channels.g_u.matrix, state.phase, channels.h_u, state.alpha_u, state.p, state.u,
        params.sigma_f_mw, params.sigma_0_mw,
    )


def downlink_sinrs(state: StaticBeamState, channels: StaticChannels, params: SystemParams) -> np.ndarray:
    return downlink_sinr(
        channels.g_d.matrix, state.phase, channels.h_d, state.alpha_d, state.w,
        params.sigma_f_mw, params.sigma_0_mw,
    )


def rates_static(state: StaticBeamState, channels: StaticChannels, params: SystemParams) -> StaticRates:
    """Per-user rates and WSR of a static state, evaluated from the channel matrices."""
    k = channels.k_users
    r_u = np.log2(1.0 + uplink_sinrs(state, channels, params)) / k
    r_d = np.log2(1.0 + downlink_sinrs(state, channels, params)) / k
    return StaticRates(r_u, r_d, params.epsilon)


# ═══════════════════════════════════════════════════════════════════════════
# BLOCK UPDATES
# ═══════════════════════════════════════════════════════════════════════════


def mrc_receive_update(channels: StaticChannels, phase: np.ndarray) -> np.ndarray:
    """
    Unit-norm MRC combiner on each user's effective uplink channel ``G_Uᴴ Φ h_{U,k}``.

    Raises:
        DegenerateChannelError: If some effective channel is zero
    """
    effective = (channels.h_u * phase) @ channels.g_u.matrix.conj()
    norms = np.linalg.norm(effective, axis=1)
    if np.any(norms == 0):
        raise DegenerateChannelError("effective uplink channel is zero")
    return effective / norms[:, None]


def transmit_update(
    channels: StaticChannels,
    phase: np.ndarray,
    alpha_d: float,
    params: SystemParams,
    k: int,
) -> np.ndarray:
    """
    Transmit beamformer of user k for fixed phases and α_D.

    The objective ``|qᴴw|²`` has rank one, so w is aligned with
    ``q = G_Dᴴ Φᴴ h_{D,k}`` and its power is capped by both P_B and the
    amplification headroom ``P_F − α_D² σ_F² N_s``.

    Raises:
        InfeasibleError: If the headroom is not positive
        DegenerateChannelError: If q is zero
    """
    headroom = params.p_f_mw - alpha_d**2 * params.sigma_f_mw * channels.n_s
    if headroom <= 0:
        raise InfeasibleError(f"amplification headroom {headroom:.3e} mW is not positive; shrink alpha_d")
    q = channels.g_d.matrix.conj().T @ (phase.conj() * channels.h_d[k])
    norm = float(np.linalg.norm(q))
    if norm == 0.0:
        raise DegenerateChannelError(f"effective downlink channel of user {k} is zero")
    direction = q / norm
    load = alpha_d**2 * float(np.linalg.norm(channels.g_d.matrix @ direction)) ** 2
    power = params.p_b_mw if load == 0.0 else min(params.p_b_mw, headroom / load)
    return math.sqrt(power) * direction


def transmit_updates(
    channels: StaticChannels, phase: np.ndarray, alpha_d: float, params: SystemParams
) -> np.ndarray:
    return np.array([transmit_update(channels, phase, alpha_d, params, k) for k in range(channels.k_users)])


def mrt_full_power(channels: StaticChannels, phase: np.ndarray, params: SystemParams) -> np.ndarray:
    """MRT on every user's effective downlink channel at the full BS power."""
    q = (channels.h_d * phase.conj()) @ channels.g_d.matrix.conj()
    norms = np.linalg.norm(q, axis=1)
    if np.any(norms == 0):
        raise DegenerateChannelError("effective downlink channel is zero")
    return math.sqrt(params.p_b_mw) * q / norms[:, None]


def alpha_uplink_update(
    channels: StaticChannels, phase: np.ndarray, params: SystemParams, powers=None
) -> float:
    """Largest α_U meeting every user's uplink amplification constraint."""
    p = _user_powers(params, channels.k_users, powers)
    return uplink_amplification(params.p_f_mw, p, channels.h_u, phase, params.sigma_f_mw)


def alpha_downlink_update(
    channels: StaticChannels, phase: np.ndarray, w: np.ndarray, params: SystemParams
) -> float:
    """Largest α_D meeting every user's downlink amplification constraint."""
    return downlink_amplification(params.p_f_mw, channels.g_d.matrix, phase, w, params.sigma_f_mw)


def complete_blocks(
    phase: np.ndarray, channels: StaticChannels, params: SystemParams, powers=None
) -> StaticBeamState:
    """Fill every block except the phases in closed form: MRC, full-power MRT, saturating α."""
    p = _user_powers(params, channels.k_users, powers)
    w = mrt_full_power(channels, phase, params)
    return StaticBeamState(
        w=w,
        u=mrc_receive_update(channels, phase),
        phase=np.asarray(phase, dtype=np.complex128),
        alpha_u=alpha_uplink_update(channels, phase, params, p),
        alpha_d=alpha_downlink_update(channels, phase, w, params),
        p=p,
    )


def with_user_powers(
    state: StaticBeamState, channels: StaticChannels, params: SystemParams, powers
) -> StaticBeamState:
    """Same state with new user powers and α_U re-saturated for them."""
    p = _user_powers(params, channels.k_users, powers)
    return state.replace(p=p, alpha_u=alpha_uplink_update(channels, state.phase, params, p))


def initial_phase(channels: StaticChannels, params: SystemParams) -> np.ndarray:
    """Phases aligned to user 0's downlink cascade when ε ≥ 0.5, else its uplink cascade."""
    if params.epsilon >= 0.5:
        return aligned_downlink_phase(channels.g_d, channels.h_d[0])
    return aligned_uplink_phase(channels.g_u, channels.h_u[0])


def constraint_slacks(
    state: StaticBeamState, channels: StaticChannels, params: SystemParams
) -> Dict[str, float]:
    """Smallest relative slack of each constraint family; negative means violated."""
    n_s = channels.n_s
    uplink_load = state.alpha_u**2 * (
        state.p * np.sum(np.abs(channels.h_u * state.phase) ** 2, axis=1) + params.sigma_f_mw * n_s
    )
    downlink_load = state.alpha_d**2 * (
        np.sum(np.abs((state.w @ channels.g_d.matrix.T) * state.phase) ** 2, axis=1) + params.sigma_f_mw * n_s
    )
    return {
        "user_power": float(np.min(params.p_u_mw - state.p) / params.p_u_mw),
        "bs_power": float(np.min(params.p_b_mw - np.sum(np.abs(state.w) ** 2, axis=1)) / params.p_b_mw),
        "unit_modulus": -float(np.max(np.abs(np.abs(state.phase) - 1.0))),
        "receive_norm": -float(np.max(np.abs(np.linalg.norm(state.u, axis=1) - 1.0))),
        "uplink_amplification": float(np.min(params.p_f_mw - uplink_load) / params.p_f_mw),
        "downlink_amplification": float(np.min(params.p_f_mw - downlink_load) / params.p_f_mw),
    }


def is_feasible(
    state: StaticBeamState,
    channels: StaticChannels,
    params: SystemParams,
    tol: float = FEASIBILITY_TOLERANCE,
) -> bool:
    return all(slack >= -tol for slack in constraint_slacks(state, channels, params).values())


# ═══════════════════════════════════════════════════════════════════════════
# FRACTIONAL PROGRAMMING
# ═══════════════════════════════════════════════════════════════════════════


def _uplink_terms(state: StaticBeamState, channels: StaticChannels, params: SystemParams):
    """Per user: cascade vectors a_k, received amplitudes x_k and noise powers."""
    combined = state.u @ channels.g_u.matrix.T
    cascades = combined.conj() * channels.h_u
    amplitudes = np.sqrt(state.p) * state.alpha_u * (cascades @ state.phase)
    noise = state.alpha_u**2 * params.sigma_f_mw * np.sum(
        np.abs(state.phase) ** 2 * np.abs(combined) ** 2, axis=1
    ) + params.sigma_0_mw * np.sum(np.abs(state.u) ** 2, axis=1)
    return cascades, amplitudes, noise, np.abs(combined) ** 2


def _downlink_terms(state: StaticBeamState, channels: StaticChannels, params: SystemParams):
    """Per user: cascade vectors c_k, received amplitudes y_k and noise powers."""
    reflected = state.w @ channels.g_d.matrix.T
    cascades = channels.h_d.conj() * reflected
    amplitudes = state.alpha_d * (cascades @ state.phase)
    noise = (
        state.alpha_d**2 * params.sigma_f_mw * np.sum(np.abs(channels.h_d) ** 2 * np.abs(state.phase) ** 2, axis=1)
        + params.sigma_0_mw
    )
    return cascades, amplitudes, noise, np.abs(channels.h_d) ** 2


def duals_mu_update(
    state: StaticBeamState, channels: StaticChannels, params: SystemParams
) -> Tuple[np.ndarray, np.ndarray]:
    """SINR auxiliaries: the current uplink and downlink SINR of every user."""
    _, x, noise_u, _ = _uplink_terms(state, channels, params)
    _, y, noise_d, _ = _downlink_terms(state, channels, params)
    return np.abs(x) ** 2 / noise_u, np.abs(y) ** 2 / noise_d


def duals_eta_update(
    state: StaticBeamState,
    channels: StaticChannels,
    params: SystemParams,
    mu_bar: np.ndarray,
    mu_tilde: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """Quadratic-transform auxiliaries ``√(1+μ)·x / (|x|² + noise)`` per user and direction."""
    _, x, noise_u, _ = _uplink_terms(state, channels, params)
    _, y, noise_d, _ = _downlink_terms(state, channels, params)
    eta_bar = np.sqrt(1.0 + mu_bar) * x / (np.abs(x) ** 2 + noise_u)
    eta_tilde = np.sqrt(1.0 + mu_tilde) * y / (np.abs(y) ** 2 + noise_d)
    return eta_bar, eta_tilde


def _weights(params: SystemParams, k_users: int) -> Tuple[float, float]:
    scale = 1.0 / (k_users * math.log(2.0))
    return (1.0 - params.epsilon) * scale, params.epsilon * scale


def ldt_objective(
    state: StaticBeamState,
    channels: StaticChannels,
    params: SystemParams,
    mu_bar: np.ndarray,
    mu_tilde: np.ndarray,
) -> float:
    """Lagrangian-dual surrogate f1; equals the WSR when μ are the SINRs."""
    ul_weight, dl_weight = _weights(params, channels.k_users)
    _, x, noise_u, _ = _uplink_terms(state, channels, params)
    _, y, noise_d, _ = _downlink_terms(state, channels, params)
    power_u, power_d = np.abs(x) ** 2, np.abs(y) ** 2
    uplink = np.log1p(mu_bar) - mu_bar + (1.0 + mu_bar) * power_u / (power_u + noise_u)
    downlink = np.log1p(mu_tilde) - mu_tilde + (1.0 + mu_tilde) * power_d / (power_d + noise_d)
    return float(ul_weight * np.sum(uplink) + dl_weight * np.sum(downlink))


def qt_objective(
    state: StaticBeamState, channels: StaticChannels, params: SystemParams, duals: AuxiliaryDuals
) -> float:
    """Quadratic-transform surrogate f2; equals f1 when η are at their optimum."""
    ul_weight, dl_weight = _weights(params, channels.k_users)
    _, x, noise_u, _ = _uplink_terms(state, channels, params)
    _, y, noise_d, _ = _downlink_terms(state, channels, params)
    mu_bar, mu_tilde = duals.mu_bar, duals.mu_tilde
    eta_bar, eta_tilde = duals.eta_bar, duals.eta_tilde
    uplink = (
        np.log1p(mu_bar)
        - mu_bar
        + 2.0 * np.sqrt(1.0 + mu_bar) * np.real(eta_bar.conj() * x)
        - np.abs(eta_bar) ** 2 * (np.abs(x) ** 2 + noise_u)
    )
    downlink = (
        np.log1p(mu_tilde)
        - mu_tilde
        + 2.0 * np.sqrt(1.0 + mu_tilde) * np.real(eta_tilde.conj() * y)
        - np.abs(eta_tilde) ** 2 * (np.abs(y) ** 2 + noise_d)
    )
    return float(ul_weight * np.sum(uplink) + dl_weight * np.sum(downlink))


def assemble_quadratic_form(
    state: StaticBeamState, channels: StaticChannels, duals: AuxiliaryDuals, params: SystemParams
) -> QuadraticForm:
    """
    A and b of the phase subproblem in ``v = conj(phase)``.

    ``f2 = (−vᴴAv + 2Re{vᴴb}) / (K ln 2) + surrogate_offset(...)``
    """
    eps = params.epsilon
    a_vectors, _, _, combined_sq = _uplink_terms(state, channels, params)
    c_vectors, _, _, downlink_sq = _downlink_terms(state, channels, params)
    ul_scale = (1.0 - eps) * np.abs(duals.eta_bar) ** 2 * state.alpha_u**2
    dl_scale = eps * np.abs(duals.eta_tilde) ** 2 * state.alpha_d**2

    a = np.einsum("k,kn,km->nm", ul_scale * state.p, a_vectors, a_vectors.conj())
    a += np.einsum("k,kn,km->nm", dl_scale, c_vectors, c_vectors.conj())
    a += np.diag(params.sigma_f_mw * (ul_scale @ combined_sq + dl_scale @ downlink_sq))

    ul_linear = (1.0 - eps) * np.sqrt(1.0 + duals.mu_bar) * np.sqrt(state.p) * state.alpha_u * duals.eta_bar.conj()
    dl_linear = eps * np.sqrt(1.0 + duals.mu_tilde) * state.alpha_d * duals.eta_tilde.conj()
    b = ul_linear @ a_vectors + dl_linear @ c_vectors
    return QuadraticForm(0.5 * (a + a.conj().T), b)


def surrogate_offset(
    state: StaticBeamState, channels: StaticChannels, duals: AuxiliaryDuals, params: SystemParams
) -> float:
    """Phase-independent part of f2."""
    ul_weight, dl_weight = _weights(params, channels.k_users)
    receive_norm = np.sum(np.abs(state.u) ** 2, axis=1)
    uplink = np.log1p(duals.mu_bar) - duals.mu_bar - np.abs(duals.eta_bar) ** 2 * params.sigma_0_mw * receive_norm
    downlink = np.log1p(duals.mu_tilde) - duals.mu_tilde - np.abs(duals.eta_tilde) ** 2 * params.sigma_0_mw
    return float(ul_weight * np.sum(uplink) + dl_weight * np.sum(downlink))


def surrogate_value(
    qf: QuadraticForm,
    phase: np.ndarray,
    state: StaticBeamState,
    channels: StaticChannels,
    duals: AuxiliaryDuals,
    params: SystemParams,
) -> float:
    """f2 at ``phase`` recovered from the assembled quadratic form."""
    scale = 1.0 / (channels.k_users * math.log(2.0))
    return scale * qf.objective(np.conj(phase)) + surrogate_offset(state, channels, duals, params)


# ═══════════════════════════════════════════════════════════════════════════
# INNER AND OUTER LOOPS
# ═══════════════════════════════════════════════════════════════════════════


def _solve_phase(
    qf: QuadraticForm,
    v0: np.ndarray,
    method: QcqpMethod,
    generator: np.random.Generator,
    num_randomizations: int,
) -> np.ndarray:
    if method is QcqpMethod.SDR:
        try:
            return solve_sdr(qf, num_randomizations=num_randomizations, rng=generator).v
        except AirsError as exc:
            logger.warning("SDR failed (%s); falling back to coordinate ascent", exc)
    try:
        return solve_coordinate_ascent(qf, v0).v
    except ConvergenceError as exc:
        logger.warning("coordinate ascent hit its sweep cap; using its last iterate")
        return exc.iterate if exc.iterate is not None else v0


def phase_inner_loop(
    state: StaticBeamState,
    channels: StaticChannels,
    params: SystemParams,
    method: QcqpMethod = QcqpMethod.COORDINATE_ASCENT,
    tol: float = 1e-6,
    max_iter: int = 100,
    rng: RandomSource = RngStream(0),
    num_randomizations: int = 200,
) -> InnerLoopResult:
    """
    Fractional-programming phase updates with every other block fixed.

    Each iteration refreshes μ and η, assembles the quadratic form and solves
    the unit-modulus QCQP. A candidate is kept only if the true WSR does not
    drop, so the trace is monotone. Stops once an iteration gains less than tol.

    Args:
        state: Current state; only its phase changes
        channels: Static channels
        params: Scenario constants
        method: QCQP solver
        tol: Minimum WSR gain (bps/Hz) to keep iterating
        max_iter: Iteration cap
        rng: Random source for the SDR solver
        num_randomizations: SDR Gaussian candidates

    Returns:
        InnerLoopResult
    """
    generator = as_generator(rng)
    current = state
    wsr = rates_static(current, channels, params).wsr
    trace, ldt_gaps, qt_gaps = [wsr], [], []
    rejected = 0
    iteration = 0

    for iteration in range(1, max_iter + 1):
        mu_bar, mu_tilde = duals_mu_update(current, channels, params)
        ldt_value = ldt_objective(current, channels, params, mu_bar, mu_tilde)
        eta_bar, eta_tilde = duals_eta_update(current, channels, params, mu_bar, mu_tilde)
        duals = AuxiliaryDuals(mu_bar, mu_tilde, eta_bar, eta_tilde)
        ldt_gaps.append(abs(ldt_value - wsr))
        qt_gaps.append(abs(qt_objective(current, channels, params, duals) - ldt_value))

        qf = assemble_quadratic_form(current, channels, duals, params)
        v = _solve_phase(qf, current.phase.conj(), method, generator, num_randomizations)
        candidate = current.replace(phase=v.conj())
        candidate_wsr = rates_static(candidate, channels, params).wsr

        gain = 0.0
        if candidate_wsr >= wsr:
            gain = candidate_wsr - wsr
            current, wsr = candidate, candidate_wsr
        else:
            rejected += 1
            logger.debug("phase candidate rejected: %.9f < %.9f", candidate_wsr, wsr)
        trace.append(wsr)
        if gain < tol:
            break

    return InnerLoopResult(current.phase, trace, ldt_gaps, qt_gaps, iteration, rejected)


def run_alternating_optimization(
    params: SystemParams,
    channels: StaticChannels,
    options: AoOptions = AoOptions(),
    on_iteration: Optional[Callable[[int, float], None]] = None,
) -> AoResult:
    """
    Two-layer alternating optimization of the static scheme.

    Users transmit at full power P_U (or the powers in ``options``). Every
    outer iteration updates u, w, α_U, α_D and then runs the phase inner loop;
    a new state is accepted only if it does not lower the WSR.

    Args:
        params: Scenario constants
        channels: Static channels
        options: Tolerances, caps, solver and warm start
        on_iteration: Called with (iteration, WSR) after each outer iteration

    Returns:
        AoResult; ``converged`` is False if max_outer was reached first
    """
    powers = _user_powers(params, channels.k_users, options.user_powers)
    phase = initial_phase(channels, params) if options.initial_phase is None else options.initial_phase
    state = complete_blocks(np.asarray(phase, dtype=np.complex128), channels, params, powers)
    wsr = rates_static(state, channels, params).wsr
    outer_trace = [wsr]
    inner_traces: List[List[float]] = []
    ldt_gaps: List[float] = []
    qt_gaps: List[float] = []
    generator = RngStream(options.seed).generator()
    converged = False
    iteration = 0

    for iteration in range(1, options.max_outer + 1):
        u = mrc_receive_update(channels, state.phase)
        w = transmit_updates(channels, state.phase, state.alpha_d, params)
        candidate = state.replace(
            u=u,
            w=w,
            alpha_u=alpha_uplink_update(channels, state.phase, params, powers),
            alpha_d=alpha_downlink_update(channels, state.phase, w, params),
        )
        inner = phase_inner_loop(
            candidate,
            channels,
            params,
            method=options.method,
            tol=options.inner_tol,
            max_iter=options.max_inner,
            rng=generator,
            num_randomizations=options.num_randomizations,
        )
        inner_traces.append(inner.trace)
        ldt_gaps.extend(inner.ldt_gaps)
        qt_gaps.extend(inner.qt_gaps)
        candidate = candidate.replace(phase=inner.phase)
        candidate_wsr = rates_static(candidate, channels, params).wsr

        gain = 0.0
        if candidate_wsr >= wsr:
            gain = candidate_wsr - wsr
            state, wsr = candidate, candidate_wsr
        outer_trace.append(wsr)
        logger.debug("AO iteration %d: WSR %.9f (+%.3e)", iteration, wsr, gain)
        if on_iteration:
            on_iteration(iteration, wsr)
        if gain < options.tol:
            converged = True
            break

    if not converged:
        logger.warning("AO stopped at the %d-iteration cap with WSR %.6f", options.max_outer, wsr)
    return AoResult(state, wsr, outer_trace, inner_traces, ldt_gaps, qt_gaps, iteration, converged)


def phase_grid_search(
    channels: StaticChannels, params: SystemParams, points_per_element: int = 8
) -> Tuple[np.ndarray, float]:
    """
    Exhaustive search over a uniform phase grid per element, other blocks in closed form.

    Returns:
        Tuple of (best phase, its WSR)
    """
    grid = np.exp(2j * np.pi * np.arange(points_per_element) / points_per_element)
    best_phase, best_wsr = None, -math.inf
    for combination in itertools.product(grid, repeat=channels.n_s):
        phase = np.array(combination)
        wsr = rates_static(complete_blocks(phase, channels, params), channels, params).wsr
        if wsr > best_wsr:
            best_phase, best_wsr = phase, wsr
    return best_phase, best_wsr
