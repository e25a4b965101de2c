"""
Multi-User Adaptive Beamforming

TDMA with K users in equal slots: each surface is re-phased for every user in
its slot, so each user sees the single-user closed forms with its own gains
and a 1/K pre-log factor. Includes the one-dimensional element-split search
and the TDMA versions of the single-AIRS and passive baselines.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from .channel import distance, pathloss_gain
from .errors import InvalidInputError
from .single_user import downlink_snr_closed_form, pirs_hop_gains, uplink_snr_closed_form
from .state import AirsSide, AllocationResult, LinkRates, SystemParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class UserLinkGains:
    """
    Per-user power gains.

    Attributes:
        h_u_sq: User k to BS-side AIRS (K)
        h_d_sq: User-side AIRS to user k (K)
    """

    h_u_sq: np.ndarray
    h_d_sq: np.ndarray

    def __post_init__(self) -> None:
        if self.h_u_sq.shape != self.h_d_sq.shape or self.h_u_sq.ndim != 1 or self.h_u_sq.size == 0:
            raise InvalidInputError("gains need one uplink and one downlink value per user")
        if not (np.all(self.h_u_sq > 0) and np.all(self.h_d_sq > 0)):
            raise InvalidInputError("gains must be positive")

    @property
    def k_users(self) -> int:
        return self.h_u_sq.size


@dataclass(frozen=True, eq=False)
class UserRates:
    """
    Per-user TDMA rates (1/K factor included).

    Attributes:
        r_u: Uplink rate of each user
        r_d: Downlink rate of each user
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


def user_link_gains(params: SystemParams) -> UserLinkGains:
    """Gains of every placed user towards both AIRSs."""
    geometry = params.geometry
    h_u = [pathloss_gain(distance(p, geometry.bs_airs_position), params.beta) for p in geometry.user_positions]
    h_d = [pathloss_gain(distance(geometry.user_airs_position, p), params.beta) for p in geometry.user_positions]
    return UserLinkGains(np.array(h_u), np.array(h_d))


def _tdma_rates(params: SystemParams, snr_u, snr_d) -> UserRates:
    k = np.size(snr_u)
    return UserRates(np.log2(1.0 + snr_u) / k, np.log2(1.0 + snr_d) / k, params.epsilon)


def rates_user_adaptive(params: SystemParams, gains: UserLinkGains, n_u: int, n_d: int) -> UserRates:
    """
    Per-user rates with n_u elements above the BS and n_d above the users.

    Args:
        params: Scenario constants
        gains: Per-user gains
        n_u: Uplink elements
        n_d: Downlink elements, with n_u + n_d = N

    Returns:
        UserRates for every user
    """
    if n_u < 0 or n_d < 0 or n_u + n_d != params.n_total:
        raise InvalidInputError(f"split ({n_u}, {n_d}) does not use all {params.n_total} elements")
    snr_u = uplink_snr_closed_form(params, n_u, params.h1_sq, gains.h_u_sq)
    snr_d = downlink_snr_closed_form(params, n_d, params.h2_sq, gains.h_d_sq)
    return _tdma_rates(params, snr_u, snr_d)


def allocate_elements_search(params: SystemParams, gains: UserLinkGains) -> AllocationResult:
    """
    Best split with both surfaces non-empty, by scanning n_d = 1..N-1.

    The first (smallest) n_d reaching the maximum wins.
    """
    n = params.n_total
    best_n_d, best_wsr = 1, -math.inf
    for n_d in range(1, n):
        wsr = rates_user_adaptive(params, gains, n - n_d, n_d).wsr
        if wsr > best_wsr:
            best_n_d, best_wsr = n_d, wsr
    logger.debug("element search over %d splits picked n_d=%d", n - 1, best_n_d)
    return AllocationResult(float(best_n_d), n - best_n_d, best_n_d, best_wsr)


def rates_single_airs_multiuser(params: SystemParams, side: AirsSide) -> UserRates:
    """TDMA rates when one AIRS with all N elements serves every user in both directions."""
    geometry = params.geometry
    surface = geometry.bs_airs_position if side is AirsSide.BS_SIDE else geometry.user_airs_position
    g_bi = pathloss_gain(distance(geometry.bs_position, surface), params.beta)
    g_iu = np.array([pathloss_gain(distance(surface, p), params.beta) for p in geometry.user_positions])
    snr_u = uplink_snr_closed_form(params, params.n_total, g_bi, g_iu)
    snr_d = downlink_snr_closed_form(params, params.n_total, g_bi, g_iu)
    return _tdma_rates(params, snr_u, snr_d)


def rates_pirs_multiuser(params: SystemParams) -> UserRates:
    """TDMA rates through the passive IRS, re-phased per user."""
    cascade = np.array(
        [
            params.m * params.n_total**2 * np.prod(pirs_hop_gains(params, p)) / params.sigma_0_mw
            for p in params.geometry.user_positions
        ]
    )
    return _tdma_rates(params, params.p_u_mw * cascade, params.p_b_mw * cascade)
