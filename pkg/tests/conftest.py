"""Shared fixtures and the hypothesis profile."""

import pytest
from hypothesis import settings

from src.core.numerics import RngStream
from src.core.state import SystemParams
from src.core.static_ao import build_static_channels
from src.experiments.placement import place_users

settings.register_profile("airs", derandomize=True, deadline=None, max_examples=50)
settings.load_profile("airs")


@pytest.fixture
def params():
    """Evaluation defaults: one user at the area center, N = 100."""
    return SystemParams.default()


@pytest.fixture
def small_static():
    """K=2 users in the disk, M=4, N_s=4."""
    base = SystemParams.default(m=4, n_total=8)
    params = base.with_users(place_users(RngStream(7), base, count=2))
    return params, build_static_channels(params)


@pytest.fixture
def single_static():
    """One user at the center, M=2, N_s=4."""
    params = SystemParams.default(m=2, n_total=8)
    return params, build_static_channels(params)
