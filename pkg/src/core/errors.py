"""
Error Types

Exception hierarchy shared by the numerical library and the experiment harness.
"""

from typing import Optional, Sequence

import numpy as np


class AirsError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(AirsError, ValueError):
    """A precondition on an input value does not hold."""


class BoundaryError(InvalidInputError):
    """A rule was called at a weight where only the exact branches apply."""


class ConfigError(InvalidInputError):
    """A scenario configuration file or value cannot be used."""


class DegenerateChannelError(AirsError):
    """An effective channel vanished, so no beamformer direction exists."""


class InfeasibleError(AirsError):
    """No point satisfies the amplification power constraint."""


class ConvergenceError(AirsError):
    """
    An iterative routine hit its iteration cap.

    Attributes:
        residual: Last stationarity residual, when the routine tracks one
        trace: Objective values recorded up to the failure
        iterate: Last iterate, usable as a fallback by the caller
    """

    def __init__(
        self,
        message: str,
        residual: Optional[float] = None,
        trace: Optional[Sequence[float]] = None,
        iterate: Optional[np.ndarray] = None,
    ):
        super().__init__(message)
        self.residual = residual
        self.trace = list(trace) if trace is not None else []
        self.iterate = iterate
