"""
Shared Model State

Scenario parameters, scheme enums and the result/state containers passed
between the single-user, multi-user and static beamforming modules.
All powers are in milliwatts and all gains are linear.
"""

import math
from dataclasses import dataclass, replace
from enum import Enum, auto
from typing import Optional, Sequence

import numpy as np

from .channel import Geometry, distance, pathloss_gain
from .errors import InvalidInputError


class AirsSide(Enum):
    """Where a single AIRS is mounted."""

    BS_SIDE = auto()
    USER_SIDE = auto()


class DeploymentScheme(Enum):
    """Candidate AIRS deployments compared by the selector."""

    BS_SIDE = auto()
    USER_SIDE = auto()
    DISTRIBUTED = auto()


class QcqpMethod(Enum):
    """Solver for the unit-modulus phase subproblem."""

    COORDINATE_ASCENT = "coordinate-ascent"
    SDR = "sdr"


@dataclass(frozen=True)
class SystemParams:
    """
    Scenario constants.

    Attributes:
        p_u_mw: User transmit power
        p_b_mw: BS transmit power
        p_f_mw: AIRS amplification power budget
        sigma_f_mw: AIRS noise power
        sigma_0_mw: Receiver noise power
        m: BS antenna count
        n_total: Total AIRS element count
        epsilon: Downlink weight in [0, 1]
        k_users: Number of users, equal to the users placed in ``geometry``
        geometry: Node positions
        beta: Reference channel power gain at 1 m
    """

    p_u_mw: float
    p_b_mw: float
    p_f_mw: float
    sigma_f_mw: float
    sigma_0_mw: float
    m: int
    n_total: int
    epsilon: float
    k_users: int
    geometry: Geometry
    beta: float

    def __post_init__(self) -> None:
        for name in ("p_u_mw", "p_b_mw", "p_f_mw", "sigma_f_mw", "sigma_0_mw", "beta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise InvalidInputError(f"{name} must be positive and finite, got {value}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise InvalidInputError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if self.m < 1:
            raise InvalidInputError(f"m must be at least 1, got {self.m}")
        if self.n_total < 2:
            raise InvalidInputError(f"n_total must be at least 2, got {self.n_total}")
        if self.k_users < 1:
            raise InvalidInputError(f"k_users must be at least 1, got {self.k_users}")
        if self.k_users != self.geometry.k_users:
            raise InvalidInputError(
                f"k_users={self.k_users} but geometry places {self.geometry.k_users} users"
            )

    @classmethod
    def default(cls, **changes) -> "SystemParams":
        """Evaluation defaults: 15/20/-5 dBm powers, -80 dBm noise, M=4, N=100, eps=0.4."""
        params = cls(
            p_u_mw=10 ** 1.5,
            p_b_mw=100.0,
            p_f_mw=10 ** -0.5,
            sigma_f_mw=1e-8,
            sigma_0_mw=1e-8,
            m=4,
            n_total=100,
            epsilon=0.4,
            k_users=1,
            geometry=Geometry.standard(200.0, 10.0),
            beta=1e-3,
        )
        return replace(params, **changes) if changes else params

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def with_users(self, user_positions: Sequence[Sequence[float]]) -> "SystemParams":
        """Same scenario with a new set of user positions."""
        geometry = self.geometry.with_users(user_positions)
        return replace(self, geometry=geometry, k_users=geometry.k_users)

    @property
    def h1_sq(self) -> float:
        """BS to BS-side AIRS power gain (distance H)."""
        return pathloss_gain(distance(self.geometry.bs_position, self.geometry.bs_airs_position), self.beta)

    @property
    def h2_sq(self) -> float:
        """BS to user-side AIRS power gain (distance √(D²+H²))."""
        return pathloss_gain(
            distance(self.geometry.bs_position, self.geometry.user_airs_position), self.beta
        )


@dataclass(frozen=True)
class LinkRates:
    """
    Uplink and downlink rates of one scheme.

    Attributes:
        ul_rate: Uplink rate (bps/Hz), summed over users
        dl_rate: Downlink rate (bps/Hz), summed over users
        epsilon: Downlink weight used for the WSR
        snr_ul: Uplink SNR(s) behind ``ul_rate``
        snr_dl: Downlink SNR(s) behind ``dl_rate``
    """

    ul_rate: float
    dl_rate: float
    epsilon: float
    snr_ul: Optional[np.ndarray] = None
    snr_dl: Optional[np.ndarray] = None

    @property
    def wsr(self) -> float:
        return (1.0 - self.epsilon) * self.ul_rate + self.epsilon * self.dl_rate


@dataclass(frozen=True)
class AllocationResult:
    """
    Element split between the BS-side (uplink) and user-side (downlink) AIRS.

    Attributes:
        x_d_continuous: Continuous downlink element count in [0, N]
        n_u: Integer uplink element count
        n_d: Integer downlink element count
        wsr_bpshz: Weighted sum rate achieved by (n_u, n_d)
    """

    x_d_continuous: float
    n_u: int
    n_d: int
    wsr_bpshz: float


@dataclass(frozen=True, eq=False)
class StaticBeamState:
    """
    Every variable of the static AIRS beamforming problem.

    Attributes:
        w: Transmit beamformers, one row per user (K × M)
        u: Unit-norm receive beamformers, one row per user (K × M)
        phase: Shared unit-modulus reflection coefficients, the diagonal of Φ (N_s)
        alpha_u: Uplink amplification factor
        alpha_d: Downlink amplification factor
        p: User transmit powers (K)
    """

    w: np.ndarray
    u: np.ndarray
    phase: np.ndarray
    alpha_u: float
    alpha_d: float
    p: np.ndarray

    @property
    def k_users(self) -> int:
        return self.w.shape[0]

    @property
    def n_s(self) -> int:
        return self.phase.shape[0]

    def replace(self, **changes) -> "StaticBeamState":
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class AuxiliaryDuals:
    """
    Fractional-programming auxiliary variables.

    Attributes:
        mu_bar: Uplink SINR variables (K)
        mu_tilde: Downlink SINR variables (K)
        eta_bar: Uplink quadratic-transform variables (K, complex)
        eta_tilde: Downlink quadratic-transform variables (K, complex)
    """

    mu_bar: np.ndarray
    mu_tilde: np.ndarray
    eta_bar: np.ndarray
    eta_tilde: np.ndarray

    def __post_init__(self) -> None:
        for name in ("mu_bar", "mu_tilde"):
            values = getattr(self, name)
            if not (np.all(np.isfinite(values)) and np.all(values >= 0)):
                raise InvalidInputError(f"{name} must be finite and nonnegative")
