"""Numerical library: channels, closed-form rates, element allocation and static beamforming."""

from .channel import ArraySpec, Geometry, LosChannel, los_link, pathloss_gain, steering_vector
from .errors import (
    AirsError,
    BoundaryError,
    ConfigError,
    ConvergenceError,
    DegenerateChannelError,
    InfeasibleError,
    InvalidInputError,
)
from .multiuser_adaptive import (
    allocate_elements_search,
    rates_pirs_multiuser,
    rates_single_airs_multiuser,
    rates_user_adaptive,
    user_link_gains,
)
from .numerics import RngStream, hermitian_principal_eig, sample_complex_gaussian, sample_from_factor
from .qcqp_solver import QuadraticForm, solve_coordinate_ascent, solve_sdr
from .single_user import (
    allocate_elements_exhaustive,
    allocate_elements_fixed,
    allocate_elements_near_optimal,
    allocate_elements_optimal,
    best_deployment,
    distributed_rates,
    pirs_rates,
    single_airs_rates,
    wsr_coefficients,
)
from .state import (
    AirsSide,
    AllocationResult,
    DeploymentScheme,
    LinkRates,
    QcqpMethod,
    StaticBeamState,
    SystemParams,
)
from .static_ao import (
    AoOptions,
    AoResult,
    build_static_channels,
    complete_blocks,
    rates_static,
    run_alternating_optimization,
)

__all__ = [
    "ArraySpec",
    "Geometry",
    "LosChannel",
    "los_link",
    "pathloss_gain",
    "steering_vector",
    "AirsError",
    "BoundaryError",
    "ConfigError",
    "ConvergenceError",
    "DegenerateChannelError",
    "InfeasibleError",
    "InvalidInputError",
    "allocate_elements_search",
    "rates_pirs_multiuser",
    "rates_single_airs_multiuser",
    "rates_user_adaptive",
    "user_link_gains",
    "RngStream",
    "hermitian_principal_eig",
    "sample_complex_gaussian",
    "sample_from_factor",
    "QuadraticForm",
    "solve_coordinate_ascent",
    "solve_sdr",
    "allocate_elements_exhaustive",
    "allocate_elements_fixed",
    "allocate_elements_near_optimal",
    "allocate_elements_optimal",
    "best_deployment",
    "distributed_rates",
    "pirs_rates",
    "single_airs_rates",
    "wsr_coefficients",
    "AirsSide",
    "AllocationResult",
    "DeploymentScheme",
    "LinkRates",
    "QcqpMethod",
    "StaticBeamState",
    "SystemParams",
    "AoOptions",
    "AoResult",
    "build_static_channels",
    "complete_blocks",
    "rates_static",
    "run_alternating_optimization",
]
