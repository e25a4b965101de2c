"""
Line-of-Sight Channels

Steering vectors of uniform planar arrays, free-space path loss and the
rank-one LoS channel matrices between the BS, both AIRSs, the PIRS and the
users. Angles are derived from the positions in ``Geometry``.
"""

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError

Position = Tuple[float, float, float]

_ANGLE_SLACK = 1e-12


@dataclass(frozen=True)
class ArraySpec:
    """
    Uniform planar array layout.

    Attributes:
        n_h: Elements along the horizontal axis
        n_v: Elements along the vertical axis
        spacing_over_wavelength: Element spacing in wavelengths
    """

    n_h: int
    n_v: int
    spacing_over_wavelength: float = 0.5

    def __post_init__(self) -> None:
        if self.n_h < 1 or self.n_v < 1:
            raise InvalidInputError(f"array needs at least one element per axis, got {self.n_h}x{self.n_v}")
        if not self.spacing_over_wavelength > 0:
            raise InvalidInputError("spacing_over_wavelength must be positive")

    @property
    def total(self) -> int:
        return self.n_h * self.n_v

    @classmethod
    def for_count(cls, count: int, spacing_over_wavelength: float = 0.5) -> "ArraySpec":
        """Near-square layout: n_h is ⌈√count⌉ lowered to the nearest divisor."""
        if count < 1:
            raise InvalidInputError(f"array needs at least one element, got {count}")
        n_h = math.isqrt(count)
        if n_h * n_h < count:
            n_h += 1
        while count % n_h:
            n_h -= 1
        return cls(n_h, count // n_h, spacing_over_wavelength)


@dataclass(frozen=True)
class Angles:
    """
    Direction of departure or arrival.

    Attributes:
        azimuth: Radians in [-π, π]
        elevation: Radians in [0, π], measured from the +z axis
    """

    azimuth: float
    elevation: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.azimuth) and math.isfinite(self.elevation)):
            raise InvalidInputError("angles must be finite")
        if abs(self.azimuth) > math.pi + _ANGLE_SLACK:
            raise InvalidInputError(f"azimuth {self.azimuth} outside [-pi, pi]")
        if not -_ANGLE_SLACK <= self.elevation <= math.pi + _ANGLE_SLACK:
            raise InvalidInputError(f"elevation {self.elevation} outside [0, pi]")

    @classmethod
    def toward(cls, origin: Sequence[float], target: Sequence[float]) -> "Angles":
        """Angles of the direction pointing from ``origin`` to ``target``."""
        direction = np.asarray(target, dtype=float) - np.asarray(origin, dtype=float)
        length = float(np.linalg.norm(direction))
        if length == 0.0:
            raise InvalidInputError("origin and target coincide")
        azimuth = math.atan2(direction[1], direction[0])
        elevation = math.acos(min(1.0, max(-1.0, direction[2] / length)))
        return cls(azimuth, elevation)


@dataclass(frozen=True, eq=False)
class LosChannel:
    """
    Rank-one LoS channel ``gain_amplitude · rx_steer · tx_steerᴴ``.

    Attributes:
        matrix: Channel matrix (rx_dim × tx_dim)
        gain_amplitude: Amplitude gain |h|
        rx_steer: Receive steering vector
        tx_steer: Transmit steering vector
    """

    matrix: np.ndarray
    gain_amplitude: float
    rx_steer: np.ndarray
    tx_steer: np.ndarray

    @property
    def rx_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def tx_dim(self) -> int:
        return self.matrix.shape[1]

    def as_column(self) -> np.ndarray:
        """Channel vector of a single-antenna transmitter."""
        if self.tx_dim != 1:
            raise InvalidInputError("as_column needs a single transmit antenna")
        return self.matrix[:, 0].copy()

    def as_conjugate_row(self) -> np.ndarray:
        """Vector h with hᴴ equal to the channel row of a single-antenna receiver."""
        if self.rx_dim != 1:
            raise InvalidInputError("as_conjugate_row needs a single receive antenna")
        return self.matrix[0, :].conj()


@dataclass(frozen=True)
class Geometry:
    """
    Node positions in meters.

    Attributes:
        d_m: BS-user ground distance D
        h_m: AIRS height H
        bs_position: BS array position
        bs_airs_position: AIRS above the BS
        user_airs_position: AIRS above the user area
        user_positions: One position per user
        pirs_position: Passive IRS position for the baseline
    """

    d_m: float
    h_m: float
    bs_position: Position
    bs_airs_position: Position
    user_airs_position: Position
    user_positions: Tuple[Position, ...]
    pirs_position: Position

    def __post_init__(self) -> None:
        if not self.d_m > 0 or not self.h_m > 0:
            raise InvalidInputError(f"D and H must be positive, got D={self.d_m}, H={self.h_m}")
        if not self.user_positions:
            raise InvalidInputError("geometry needs at least one user")

    @classmethod
    def standard(
        cls,
        d_m: float = 200.0,
        h_m: float = 10.0,
        user_positions: Optional[Sequence[Sequence[float]]] = None,
        pirs_position: Optional[Sequence[float]] = None,
    ) -> "Geometry":
        """
        Evaluation layout: BS at the origin, one AIRS H above it, the other H
        above the user-area center (0, D, 0).
        """
        users = user_positions if user_positions is not None else [(0.0, d_m, 0.0)]
        pirs = pirs_position if pirs_position is not None else (0.0, 0.0, h_m)
        return cls(
            d_m=float(d_m),
            h_m=float(h_m),
            bs_position=(0.0, 0.0, 0.0),
            bs_airs_position=(0.0, 0.0, float(h_m)),
            user_airs_position=(0.0, float(d_m), float(h_m)),
            user_positions=tuple(_as_position(p) for p in users),
            pirs_position=_as_position(pirs),
        )

    @property
    def user_center(self) -> Position:
        return (0.0, self.d_m, 0.0)

    @property
    def k_users(self) -> int:
        return len(self.user_positions)

    def with_users(self, user_positions: Sequence[Sequence[float]]) -> "Geometry":
        return replace(self, user_positions=tuple(_as_position(p) for p in user_positions))


def _as_position(values: Sequence[float]) -> Position:
    position = tuple(float(v) for v in values)
    if len(position) != 3 or not all(math.isfinite(v) for v in position):
        raise InvalidInputError(f"position must be three finite coordinates, got {values}")
    return position  # type: ignore[return-value]


def distance(a: Sequence[float], b: Sequence[float]) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


def _phase_ramp(x: float, length: int) -> np.ndarray:
    return np.exp(1j * np.pi * np.arange(length) * x)


def steering_vector(angles: Angles, array: ArraySpec) -> np.ndarray:
    """
    Planar-array steering vector, horizontal factor ⊗ vertical factor.

    Args:
        angles: Direction of departure or arrival
        array: Array layout

    Returns:
        Unit-modulus vector of length ``array.total``
    """
    scale = 2.0 * array.spacing_over_wavelength
    horizontal = _phase_ramp(scale * math.sin(angles.azimuth) * math.sin(angles.elevation), array.n_h)
    vertical = _phase_ramp(scale * math.cos(angles.elevation), array.n_v)
    return np.kron(horizontal, vertical)


def pathloss_gain(distance_m: float, beta: float) -> float:
    """
    Free-space power gain ``beta / distance²``.

    Raises:
        InvalidInputError: If distance_m or beta is not positive
    """
    if not distance_m > 0:
        raise InvalidInputError(f"distance must be positive, got {distance_m}")
    if not beta > 0:
        raise InvalidInputError(f"beta must be positive, got {beta}")
    return beta / distance_m**2


def build_los_channel(
    gain_amplitude: float,
    rx: Tuple[Angles, ArraySpec],
    tx: Tuple[Angles, ArraySpec],
) -> LosChannel:
    """Assemble ``gain · a_r · a_tᴴ`` from receive and transmit array directions."""
    if not gain_amplitude >= 0:
        raise InvalidInputError(f"gain amplitude must be nonnegative, got {gain_amplitude}")
    rx_steer = steering_vector(*rx)
    tx_steer = steering_vector(*tx)
    matrix = gain_amplitude * np.outer(rx_steer, tx_steer.conj())
    return LosChannel(matrix, float(gain_amplitude), rx_steer, tx_steer)


def los_link(
    tx_position: Sequence[float],
    rx_position: Sequence[float],
    tx_array: ArraySpec,
    rx_array: ArraySpec,
    beta: float,
) -> LosChannel:
    """LoS channel between two positioned arrays."""
    gain = math.sqrt(pathloss_gain(distance(tx_position, rx_position), beta))
    departure = Angles.toward(tx_position, rx_position)
    arrival = Angles.toward(rx_position, tx_position)
    return build_los_channel(gain, (arrival, rx_array), (departure, tx_array))


SINGLE_ANTENNA = ArraySpec(1, 1)
