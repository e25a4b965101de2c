"""
User Placement

Uniform user drops over the disk around the user-area center.
"""

import math
from typing import List, Optional

import numpy as np

from ..core.channel import Position
from ..core.errors import InvalidInputError
from ..core.numerics import RandomSource, RngStream, as_generator
from ..core.state import SystemParams


def place_users(
    rng: RandomSource,
    params: SystemParams,
    radius_m: float = 5.0,
    count: Optional[int] = None,
) -> List[Position]:
    """
    Draw user positions uniformly over a disk on the ground.

    The radius is ``R·√u`` so the density is uniform in area.

    Args:
        rng: Random source
        params: Scenario; the disk is centered at ``(0, D, 0)``
        radius_m: Disk radius
        count: Users to draw, default ``params.k_users``

    Returns:
        One (x, y, 0) position per user
    """
    if radius_m < 0 or not math.isfinite(radius_m):
        raise InvalidInputError(f"radius must be finite and nonnegative, got {radius_m}")
    k = params.k_users if count is None else count
    if k < 1:
        raise InvalidInputError("at least one user must be placed")
    generator = as_generator(rng)
    uniforms = generator.random((k, 2))
    radii = radius_m * np.sqrt(uniforms[:, 0])
    angles = 2.0 * np.pi * uniforms[:, 1]
    cx, cy, _ = params.geometry.user_center
    return [(float(cx + r * math.cos(a)), float(cy + r * math.sin(a)), 0.0) for r, a in zip(radii, angles)]


def drop_stream(seed: int, grid_index: int, drop: int) -> RngStream:
    """Stream of drop ``drop`` at grid point ``grid_index``; shared by every scheme at that point."""
    return RngStream(seed, grid_index).child(drop)


def dropped_params(params: SystemParams, seed: int, grid_index: int, drop: int, radius_m: float) -> SystemParams:
    return params.with_users(place_users(drop_stream(seed, grid_index, drop), params, radius_m))
