"""
Numerical Kernel

Complex vector/matrix validation, reproducible random streams and the few
iterative routines the rest of the library needs: power iteration for the
principal eigenpair of a Hermitian matrix and circularly-symmetric complex
Gaussian sampling from a PSD covariance.

Vectors and matrices are plain ``numpy`` arrays of ``complex128``.
"""

from dataclasses import dataclass, field, replace
from typing import Optional, Tuple, Union

import numpy as np

from .errors import ConvergenceError, InvalidInputError

_U64_LIMIT = 2**64

HERMITIAN_RTOL = 1e-12
PSD_EIG_TOL = 1e-9


@dataclass(frozen=True)
class RngStream:
    """
    Identifies one reproducible random stream.

    Every call to ``generator()`` starts the stream from the beginning, so two
    calls on equal streams draw identical sequences. Distinct ``stream_id`` or
    ``path`` values give statistically independent streams.

    Attributes:
        seed: Base seed shared by a whole experiment
        stream_id: Stream index, e.g. the sweep grid index
        path: Further child indices below ``stream_id``
    """

    seed: int = 0
    stream_id: int = 0
    path: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        checks = [("seed", self.seed), ("stream_id", self.stream_id)]
        checks += [("path", index) for index in self.path]
        for name, value in checks:
            if not 0 <= int(value) < _U64_LIMIT:
                raise InvalidInputError(f"{name} must be an unsigned 64-bit integer, got {value}")

    def generator(self) -> np.random.Generator:
        """Fresh counter-based generator positioned at the start of the stream."""
        sequence = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))
        return np.random.Generator(np.random.Philox(sequence))

    def child(self, index: int) -> "RngStream":
        """Independent sub-stream, e.g. one per user drop."""
        return replace(self, path=self.path + (int(index),))


RandomSource = Union[RngStream, np.random.Generator]


def as_generator(rng: RandomSource) -> np.random.Generator:
    """Return a generator for either a stream descriptor or a live generator."""
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise InvalidInputError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


# ═══════════════════════════════════════════════════════════════════════════
# VALIDATION
# ═══════════════════════════════════════════════════════════════════════════


def as_cvec(values, name: str = "vector") -> np.ndarray:
    """
    Convert to a finite one-dimensional complex array.

    Raises:
        InvalidInputError: If the input is not 1-D or holds NaN/Inf
    """
    array = np.asarray(values, dtype=np.complex128)
    if array.ndim != 1:
        raise InvalidInputError(f"{name} must be one-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return array


def as_cmat(values, name: str = "matrix") -> np.ndarray:
    """
    Convert to a finite two-dimensional complex array.

    Raises:
        InvalidInputError: If the input is not 2-D or holds NaN/Inf
    """
    array = np.asarray(values, dtype=np.complex128)
    if array.ndim != 2:
        raise InvalidInputError(f"{name} must be two-dimensional, got shape {array.shape}")
    if not np.all(np.isfinite(array)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return array


def is_hermitian(m: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    """Elementwise Hermitian check relative to the largest entry magnitude."""
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        return False
    scale = float(np.max(np.abs(m))) if m.size else 0.0
    return bool(np.all(np.abs(m - m.conj().T) <= rtol * scale))


def _require_hermitian(m, name: str) -> np.ndarray:
    matrix = as_cmat(m, name)
    if matrix.shape[0] != matrix.shape[1]:
        raise InvalidInputError(f"{name} must be square, got shape {matrix.shape}")
    if not is_hermitian(matrix):
        raise InvalidInputError(f"{name} is not Hermitian")
    return matrix


def unit_modulus(values) -> np.ndarray:
    """Project each entry onto the unit circle; zero entries map to 1."""
    return np.exp(1j * np.angle(np.asarray(values, dtype=np.complex128)))


# ═══════════════════════════════════════════════════════════════════════════
# EIGENPAIR
# ═══════════════════════════════════════════════════════════════════════════


def hermitian_principal_eig(
    m,
    tol: float = 1e-9,
    max_iter: int = 10_000,
) -> Tuple[float, np.ndarray]:
    """
    Largest eigenvalue and a unit eigenvector of a Hermitian matrix.

    Power iteration runs on ``m + ‖m‖_F·I`` so the largest eigenvalue is also
    the dominant one in magnitude. The start vector is drawn from a fixed
    stream, which keeps the result deterministic.

    Args:
        m: Hermitian matrix
        tol: Residual tolerance relative to ‖m‖_F
        max_iter: Iteration cap

    Returns:
        Tuple of (eigenvalue, eigenvector) with ‖m·v − λv‖ ≤ tol·‖m‖_F

    Raises:
        InvalidInputError: If m is not square and Hermitian, or tol ≤ 0
        ConvergenceError: If the residual target is not met within max_iter
    """
    matrix = _require_hermitian(m, "m")
    if tol <= 0:
        raise InvalidInputError("tol must be positive")
    n = matrix.shape[0]
    if n == 0:
        raise InvalidInputError("m must be non-empty")

    frobenius = float(np.linalg.norm(matrix))
    start = standard_complex_normal(RngStream(0).generator(), (n,))
    vector = start / np.linalg.norm(start)
    if frobenius == 0.0:
        return 0.0, vector

    shifted = matrix + frobenius * np.eye(n)
    residual = np.inf
    for _ in range(max_iter):
        image = shifted @ vector
        vector = image / np.linalg.norm(image)
        product = matrix @ vector
        eigenvalue = float(np.real(np.vdot(vector, product)))
        residual = float(np.linalg.norm(product - eigenvalue * vector))
        if residual <= tol * frobenius:
            return eigenvalue, vector

    raise ConvergenceError(
        f"power iteration did not converge in {max_iter} iterations",
        residual=residual,
        iterate=vector,
    )


# ═══════════════════════════════════════════════════════════════════════════
# GAUSSIAN SAMPLING
# ═══════════════════════════════════════════════════════════════════════════


def standard_complex_normal(generator: np.random.Generator, shape) -> np.ndarray:
    """Box-Muller draws of i.i.d. CN(0, 1) entries."""
    u1 = 1.0 - generator.random(shape)
    u2 = generator.random(shape)
    return np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)


def psd_factor(cov, tol: float = PSD_EIG_TOL) -> np.ndarray:
    """
    Square factor F with F·Fᴴ = cov for a possibly singular PSD matrix.

    Built from the Hermitian eigendecomposition. Eigenvalues within ``tol``
    (relative to the largest magnitude) below zero are rounding and clip to 0.

    Raises:
        InvalidInputError: If cov is not Hermitian PSD
    """
    matrix = _require_hermitian(cov, "cov")
    n = matrix.shape[0]
    if n == 0 or not np.any(matrix):
        return np.zeros((n, n), dtype=np.complex128)
    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    scale = float(np.max(np.abs(eigenvalues)))
    if eigenvalues[0] < -tol * scale:
        raise InvalidInputError(
            f"cov is not positive semidefinite (smallest eigenvalue {eigenvalues[0]:.3g})"
        )
    return eigenvectors * np.sqrt(np.clip(eigenvalues, 0.0, None))


def sample_from_factor(
    factor,
    rng: RandomSource,
    num_samples: Optional[int] = None,
) -> np.ndarray:
    """
    Draw F·z with z ~ CN(0, I), i.e. from CN(0, F·Fᴴ), without forming F·Fᴴ.

    Args:
        factor: n×r factor, any r ≥ 1
        rng: Stream descriptor (restarts the stream) or live generator
        num_samples: None for a single vector, else the number of rows

    Returns:
        Array of shape (n,) or (num_samples, n)
    """
    factor = as_cmat(factor, "factor")
    rank = factor.shape[1]
    shape = (rank,) if num_samples is None else (int(num_samples), rank)
    draws = standard_complex_normal(as_generator(rng), shape)
    return draws @ factor.T


def sample_complex_gaussian(
    cov,
    rng: RandomSource,
    num_samples: Optional[int] = None,
) -> np.ndarray:
    """
    Draw circularly-symmetric complex Gaussian vectors with covariance cov.

    Args:
        cov: PSD covariance matrix (n×n)
        rng: Stream descriptor (restarts the stream) or live generator
        num_samples: None for a single vector, else the number of rows

    Returns:
        Array of shape (n,) or (num_samples, n)
    """
    return sample_from_factor(psd_factor(cov), rng, num_samples)
