"""
Single-User Closed Forms

Rates of one user served by a distributed AIRS pair (one surface per
direction), by a single AIRS above the BS or above the user, and by a passive
IRS; the optimal and near-optimal element splits and the deployment selector.

The user sits at the area center, so the BS-to-BS-side-AIRS gain is h₁²
(distance H) and both slant links have gain h₂² (distance √(D²+H²)).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .channel import distance, pathloss_gain
from .errors import BoundaryError
from .state import AirsSide, AllocationResult, DeploymentScheme, LinkRates, SystemParams

logger = logging.getLogger(__name__)

TIE_TOLERANCE = 1e-12


@dataclass(frozen=True)
class WsrCoefficients:
    """
    Scenario constants of the distributed-AIRS rate expression.

    Attributes:
        f1: Per-element signal coefficient M·P_F·h₁²·h₂²
        f2: Uplink noise coefficient
        f3: Downlink noise coefficient
        w1: Largest weight for which the downlink gets no elements
        w2: Smallest weight for which the downlink gets every element
    """

    f1: float
    f2: float
    f3: float
    w1: float
    w2: float


def wsr_coefficients(params: SystemParams) -> WsrCoefficients:
    """
    Compute f1, f2, f3 and the allocation thresholds W1 < W2.

    Args:
        params: Scenario constants

    Returns:
        WsrCoefficients for the scenario
    """
    h1, h2 = params.h1_sq, params.h2_sq
    noise_product = params.sigma_f_mw * params.sigma_0_mw
    f1 = params.m * params.p_f_mw * h1 * h2
    f2 = params.m * params.p_f_mw * h1 * params.sigma_f_mw + params.p_u_mw * h2 * params.sigma_0_mw + noise_product
    f3 = params.p_f_mw * h1 * params.sigma_f_mw + params.m * params.p_b_mw * h2 * params.sigma_0_mw + noise_product

    full = params.p_b_mw * params.p_u_mw * f1 * params.n_total
    total = full + params.p_b_mw * f2 + params.p_u_mw * f3
    w1 = params.p_u_mw * f3 / total
    w2 = (full + params.p_u_mw * f3) / total
    return WsrCoefficients(f1, f2, f3, w1, w2)


# ═══════════════════════════════════════════════════════════════════════════
# CLOSED-FORM SNRS
# ═══════════════════════════════════════════════════════════════════════════


def uplink_snr_closed_form(params: SystemParams, n_elements, g_bi, g_iu, power: Optional[float] = None):
    """
    Uplink SNR through an AIRS with optimal phases, amplification and MRC.

    Args:
        params: Scenario constants
        n_elements: Elements on the surface (scalar or array)
        g_bi: BS to surface power gain
        g_iu: User to surface power gain (scalar or array)
        power: User transmit power, defaults to P_U

    Returns:
        SNR with the broadcast shape of the inputs
    """
    p = params.p_u_mw if power is None else power
    numerator = p * params.p_f_mw * params.m * np.asarray(n_elements) * g_bi * np.asarray(g_iu)
    denominator = (
        params.m * params.p_f_mw * g_bi * params.sigma_f_mw
        + p * np.asarray(g_iu) * params.sigma_0_mw
        + params.sigma_f_mw * params.sigma_0_mw
    )
    return numerator / denominator


def downlink_snr_closed_form(params: SystemParams, n_elements, g_bi, g_iu):
    """Downlink SNR through an AIRS with optimal phases, amplification and MRT."""
    numerator = params.p_b_mw * params.p_f_mw * params.m * np.asarray(n_elements) * g_bi * np.asarray(g_iu)
    denominator = (
        params.p_f_mw * np.asarray(g_iu) * params.sigma_f_mw
        + params.m * params.p_b_mw * g_bi * params.sigma_0_mw
        + params.sigma_f_mw * params.sigma_0_mw
    )
    return numerator / denominator


# ═══════════════════════════════════════════════════════════════════════════
# DISTRIBUTED AIRS
# ═══════════════════════════════════════════════════════════════════════════


def distributed_rates(params: SystemParams, n_u: int, n_d: int) -> LinkRates:
    """Rates with n_u elements above the BS (uplink) and n_d above the user (downlink)."""
    coeffs = wsr_coefficients(params)
    snr_ul = params.p_u_mw * coeffs.f1 * n_u / coeffs.f2
    snr_dl = params.p_b_mw * coeffs.f1 * n_d / coeffs.f3
    return LinkRates(
        ul_rate=math.log2(1.0 + snr_ul),
        dl_rate=math.log2(1.0 + snr_dl),
        epsilon=params.epsilon,
        snr_ul=np.array([snr_ul]),
        snr_dl=np.array([snr_dl]),
    )


def wsr_distributed(params: SystemParams, n_u: int, n_d: int) -> float:
    return distributed_rates(params, n_u, n_d).wsr


def derivative_proxy(params: SystemParams, x_d: float) -> float:
    """
    Quantity with the sign of d(WSR)/dx_d for the split (N - x_d, x_d).

    It is affine and decreasing in x_d, so its root is the continuous optimum.
    """
    coeffs = wsr_coefficients(params)
    pbpu = params.p_b_mw * params.p_u_mw
    total = pbpu * coeffs.f1 * params.n_total + params.p_b_mw * coeffs.f2 + params.p_u_mw * coeffs.f3
    return -pbpu * coeffs.f1 * x_d + params.epsilon * total - params.p_u_mw * coeffs.f3


def _integer_split(params: SystemParams, x_d: float) -> AllocationResult:
    n = params.n_total
    lower = min(max(math.floor(x_d), 0), n)
    upper = min(max(math.ceil(x_d), 0), n)
    best, best_wsr = lower, wsr_distributed(params, n - lower, lower)
    if upper != lower:
        candidate = wsr_distributed(params, n - upper, upper)
        # ties go to the smaller downlink share
        if candidate > best_wsr + TIE_TOLERANCE:
            best, best_wsr = upper, candidate
    return AllocationResult(float(x_d), n - best, best, best_wsr)


def allocate_elements_optimal(params: SystemParams) -> AllocationResult:
    """
    Optimal element split between the two AIRSs.

    The continuous optimum follows the three-branch threshold rule on epsilon;
    the integer split is the better of its floor and ceiling.

    Args:
        params: Scenario constants

    Returns:
        AllocationResult with the continuous and integer splits
    """
    coeffs = wsr_coefficients(params)
    eps = params.epsilon
    if eps <= coeffs.w1:
        x_d = 0.0
    elif eps >= coeffs.w2:
        x_d = float(params.n_total)
    else:
        pbpu = params.p_b_mw * params.p_u_mw
        total = pbpu * coeffs.f1 * params.n_total + params.p_b_mw * coeffs.f2 + params.p_u_mw * coeffs.f3
        x_d = (eps * total - params.p_u_mw * coeffs.f3) / (pbpu * coeffs.f1)
    return _integer_split(params, x_d)


def allocate_elements_exhaustive(params: SystemParams) -> AllocationResult:
    """Scan every n_d in {0..N}; the smallest n_d within the tie tolerance of the best wins."""
    n = params.n_total
    values = np.array([wsr_distributed(params, n - n_d, n_d) for n_d in range(n + 1)])
    best = int(np.flatnonzero(values >= values.max() - TIE_TOLERANCE)[0])
    return AllocationResult(float(best), n - best, best, float(values[best]))


def allocate_elements_near_optimal(epsilon: float, n_total: int) -> float:
    """
    High-SNR split: the downlink share is proportional to its weight.

    Raises:
        BoundaryError: If epsilon is not strictly inside (0, 1)
    """
    if not 0.0 < epsilon < 1.0:
        raise BoundaryError(
            f"near-optimal split needs 0 < epsilon < 1, got {epsilon}; "
            "use allocate_elements_optimal, which gives n_d = 0 at epsilon = 0 and n_d = N at epsilon = 1"
        )
    return epsilon * n_total


def allocate_elements_fixed(params: SystemParams) -> AllocationResult:
    """Integer split at round(epsilon·N), falling back to the exact branches at epsilon ∈ {0, 1}."""
    if 0.0 < params.epsilon < 1.0:
        x_d = allocate_elements_near_optimal(params.epsilon, params.n_total)
    else:
        x_d = params.epsilon * params.n_total
    n_d = min(max(int(round(x_d)), 0), params.n_total)
    n_u = params.n_total - n_d
    return AllocationResult(x_d, n_u, n_d, wsr_distributed(params, n_u, n_d))


# ═══════════════════════════════════════════════════════════════════════════
# SINGLE AIRS AND PASSIVE BASELINE
# ═══════════════════════════════════════════════════════════════════════════


def single_airs_rates(params: SystemParams, side: AirsSide) -> LinkRates:
    """Rates when one AIRS with all N elements serves both directions."""
    h1, h2 = params.h1_sq, params.h2_sq
    # (BS-surface gain, surface-user gain)
    g_bi, g_iu = (h1, h2) if side is AirsSide.BS_SIDE else (h2, h1)
    snr_ul = float(uplink_snr_closed_form(params, params.n_total, g_bi, g_iu))
    snr_dl = float(downlink_snr_closed_form(params, params.n_total, g_bi, g_iu))
    return LinkRates(
        ul_rate=math.log2(1.0 + snr_ul),
        dl_rate=math.log2(1.0 + snr_dl),
        epsilon=params.epsilon,
        snr_ul=np.array([snr_ul]),
        snr_dl=np.array([snr_dl]),
    )


def wsr_single_airs(params: SystemParams, side: AirsSide) -> float:
    return single_airs_rates(params, side).wsr


def best_deployment(params: SystemParams) -> Tuple[DeploymentScheme, float]:
    """
    Pick the deployment with the largest WSR.

    The distributed pair only competes when epsilon lies strictly between the
    thresholds W1 and W2; otherwise its optimum leaves one surface empty.

    Returns:
        Tuple of (scheme, WSR); earlier candidates win ties
    """
    coeffs = wsr_coefficients(params)
    candidates = [
        (DeploymentScheme.BS_SIDE, wsr_single_airs(params, AirsSide.BS_SIDE)),
        (DeploymentScheme.USER_SIDE, wsr_single_airs(params, AirsSide.USER_SIDE)),
    ]
    if coeffs.w1 < params.epsilon < coeffs.w2:
        candidates.append((DeploymentScheme.DISTRIBUTED, allocate_elements_optimal(params).wsr_bpshz))
    scheme, wsr = max(candidates, key=lambda candidate: candidate[1])
    logger.debug("best deployment %s with WSR %.6f", scheme.name, wsr)
    return scheme, wsr


def pirs_hop_gains(params: SystemParams, user_position=None) -> Tuple[float, float]:
    """Power gains BS to PIRS and PIRS to user."""
    geometry = params.geometry
    user = geometry.user_positions[0] if user_position is None else user_position
    g_a = pathloss_gain(distance(geometry.bs_position, geometry.pirs_position), params.beta)
    g_b = pathloss_gain(distance(geometry.pirs_position, user), params.beta)
    return g_a, g_b


def pirs_rates(params: SystemParams, n_elements: Optional[int] = None) -> LinkRates:
    """Rates through a passive IRS with unit-amplitude reflection and no AIRS noise."""
    n = params.n_total if n_elements is None else n_elements
    g_a, g_b = pirs_hop_gains(params)
    cascade = params.m * n**2 * g_a * g_b / params.sigma_0_mw
    snr_ul = params.p_u_mw * cascade
    snr_dl = params.p_b_mw * cascade
    return LinkRates(
        ul_rate=math.log2(1.0 + snr_ul),
        dl_rate=math.log2(1.0 + snr_dl),
        epsilon=params.epsilon,
        snr_ul=np.array([snr_ul]),
        snr_dl=np.array([snr_dl]),
    )


def wsr_pirs_baseline(params: SystemParams, n_elements: Optional[int] = None) -> float:
    return pirs_rates(params, n_elements).wsr
