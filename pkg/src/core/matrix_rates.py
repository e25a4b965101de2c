"""
Matrix Rate Evaluation

SINRs computed directly from channel matrices, including the noise an AIRS
amplifies and re-radiates, plus the per-link optimal beamformers (phase
alignment, saturating amplification factor, MRC/MRT). This is the ground
truth the closed-form rates are checked against.

Multi-user arrays carry one user per row.
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np

from .channel import SINGLE_ANTENNA, ArraySpec, LosChannel, los_link
from .errors import DegenerateChannelError
from .state import SystemParams


def uplink_sinr(
    g_u: np.ndarray,
    phase: np.ndarray,
    h_u: np.ndarray,
    alpha: float,
    power,
    u: np.ndarray,
    sigma_f_mw: float,
    sigma_0_mw: float,
) -> np.ndarray:
    """
    Uplink SINR per user.

    ``p·|uᴴ Gᴴ αΦ h|² / (uᴴ(α²σ_F² GᴴΦΦᴴG + σ_0² I)u)``

    Args:
        g_u: BS to AIRS channel (N × M)
        phase: Reflection coefficients (N)
        h_u: User to AIRS channels (K × N)
        alpha: Amplification factor
        power: User transmit power(s), scalar or (K)
        u: Receive beamformers (K × M)
        sigma_f_mw: AIRS noise power
        sigma_0_mw: Receiver noise power

    Returns:
        SINR per user (K)
    """
    h_u = np.atleast_2d(h_u)
    u = np.atleast_2d(u)
    effective = (h_u * phase) @ g_u.conj()
    signal = np.asarray(power) * alpha**2 * np.abs(np.sum(u.conj() * effective, axis=1)) ** 2
    combined = u @ g_u.T
    amplified = alpha**2 * sigma_f_mw * np.sum(np.abs(phase) ** 2 * np.abs(combined) ** 2, axis=1)
    noise = amplified + sigma_0_mw * np.sum(np.abs(u) ** 2, axis=1)
    return signal / noise


def downlink_sinr(
    g_d: np.ndarray,
    phase: np.ndarray,
    h_d: np.ndarray,
    alpha: float,
    w: np.ndarray,
    sigma_f_mw: float,
    sigma_0_mw: float,
) -> np.ndarray:
    """
    Downlink SINR per user, ``|hᴴ αΦ G w|² / (α²σ_F²‖hᴴΦ‖² + σ_0²)``.

    ``h_d`` holds one vector per row with hᴴ the AIRS-to-user channel row.
    """
    h_d = np.atleast_2d(h_d)
    w = np.atleast_2d(w)
    reflected = w @ g_d.T
    signal = alpha**2 * np.abs(np.sum(h_d.conj() * phase * reflected, axis=1)) ** 2
    amplified = alpha**2 * sigma_f_mw * np.sum(np.abs(h_d) ** 2 * np.abs(phase) ** 2, axis=1)
    return signal / (amplified + sigma_0_mw)


# ═══════════════════════════════════════════════════════════════════════════
# PER-LINK OPTIMAL BEAMFORMERS
# ═══════════════════════════════════════════════════════════════════════════


def aligned_uplink_phase(g_u: LosChannel, h_u: np.ndarray) -> np.ndarray:
    """Phases that co-phase every element of ``Gᴴ Φ h`` on a LoS channel."""
    return np.exp(1j * (np.angle(g_u.rx_steer) - np.angle(h_u)))


def aligned_downlink_phase(g_d: LosChannel, h_d: np.ndarray) -> np.ndarray:
    """Phases that co-phase every element of ``hᴴ Φ G`` on a LoS channel."""
    return np.exp(1j * (np.angle(h_d) - np.angle(g_d.rx_steer)))


def uplink_amplification(p_f_mw: float, power, h_u: np.ndarray, phase: np.ndarray, sigma_f_mw: float) -> float:
    """Largest common α meeting ``α²(p_k‖Φh_k‖² + σ_F²N) ≤ P_F`` for every user."""
    h_u = np.atleast_2d(h_u)
    load = np.asarray(power) * np.sum(np.abs(h_u * phase) ** 2, axis=1) + sigma_f_mw * phase.size
    return float(np.min(np.sqrt(p_f_mw / load)))


def downlink_amplification(
    p_f_mw: float, g_d: np.ndarray, phase: np.ndarray, w: np.ndarray, sigma_f_mw: float
) -> float:
    """Largest common α meeting ``α²(‖ΦGw_k‖² + σ_F²N) ≤ P_F`` for every user."""
    w = np.atleast_2d(w)
    load = np.sum(np.abs((w @ g_d.T) * phase) ** 2, axis=1) + sigma_f_mw * phase.size
    return float(np.min(np.sqrt(p_f_mw / load)))


def unit_direction(vector: np.ndarray, what: str = "effective channel") -> np.ndarray:
    """
    Normalize a beamforming direction.

    Raises:
        DegenerateChannelError: If the vector is zero
    """
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        raise DegenerateChannelError(f"{what} is zero")
    return vector / norm


# ═══════════════════════════════════════════════════════════════════════════
# POSITIONED LINKS
# ═══════════════════════════════════════════════════════════════════════════


def matrix_link_snrs(
    params: SystemParams,
    ul_airs_position: Optional[Sequence[float]],
    dl_airs_position: Optional[Sequence[float]],
    user_position: Sequence[float],
    n_u: int,
    n_d: int,
    passive: bool = False,
) -> Tuple[float, float]:
    """
    Uplink and downlink SNR of one user served by per-link optimal beamforming.

    Every LoS matrix is built from positions; the reflecting surface for each
    direction gets its own element count. A passive surface reflects with unit
    amplitude and adds no noise.

    Args:
        params: Scenario constants
        ul_airs_position: Surface serving the uplink
        dl_airs_position: Surface serving the downlink
        user_position: The served user
        n_u: Uplink surface elements (0 gives SNR 0)
        n_d: Downlink surface elements (0 gives SNR 0)
        passive: Unit-amplitude reflection without AIRS noise

    Returns:
        Tuple of (uplink SNR, downlink SNR)
    """
    bs_array = ArraySpec.for_count(params.m)
    bs = params.geometry.bs_position
    sigma_f = 0.0 if passive else params.sigma_f_mw
    snr_ul = snr_dl = 0.0

    if n_u > 0:
        surface = ArraySpec.for_count(n_u)
        g_u = los_link(bs, ul_airs_position, bs_array, surface, params.beta)
        h_u = los_link(user_position, ul_airs_position, SINGLE_ANTENNA, surface, params.beta).as_column()
        phase = aligned_uplink_phase(g_u, h_u)
        alpha = 1.0 if passive else uplink_amplification(params.p_f_mw, params.p_u_mw, h_u, phase, sigma_f)
        u = unit_direction(g_u.matrix.conj().T @ (phase * h_u))
        snr_ul = float(
            uplink_sinr(g_u.matrix, phase, h_u, alpha, params.p_u_mw, u, sigma_f, params.sigma_0_mw)[0]
        )

    if n_d > 0:
        surface = ArraySpec.for_count(n_d)
        g_d = los_link(bs, dl_airs_position, bs_array, surface, params.beta)
        h_d = los_link(dl_airs_position, user_position, surface, SINGLE_ANTENNA, params.beta).as_conjugate_row()
        phase = aligned_downlink_phase(g_d, h_d)
        w = math.sqrt(params.p_b_mw) * unit_direction(g_d.matrix.conj().T @ (phase.conj() * h_d))
        alpha = 1.0 if passive else downlink_amplification(params.p_f_mw, g_d.matrix, phase, w, sigma_f)
        snr_dl = float(downlink_sinr(g_d.matrix, phase, h_d, alpha, w, sigma_f, params.sigma_0_mw)[0])

    return snr_ul, snr_dl
