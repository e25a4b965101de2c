"""
Unit-Modulus QCQP Solver

Maximizes ``−vᴴAv + 2Re{vᴴb}`` subject to ``|v_n| = 1``. Two solvers:

- coordinate ascent, which sets each v_n to its exact maximizer in turn;
- semidefinite relaxation of the homogenized problem, solved by a low-rank
  factorization with unit-norm rows, followed by Gaussian randomization and
  a coordinate-ascent polish.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import ConvergenceError, InvalidInputError
from .numerics import (
    RandomSource,
    RngStream,
    as_cmat,
    as_cvec,
    as_generator,
    hermitian_principal_eig,
    is_hermitian,
    sample_from_factor,
    standard_complex_normal,
    unit_modulus,
)

logger = logging.getLogger(__name__)

PSD_TRIALS = 100
PSD_TOLERANCE = 1e-9
UNIT_MODULUS_TOLERANCE = 1e-9
MIN_COORDINATE_MAGNITUDE = 1e-15


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """
    Objective ``−vᴴAv + 2Re{vᴴb}``.

    Attributes:
        a: Hermitian PSD matrix (n×n)
        b: Linear coefficient vector (n)
    """

    a: np.ndarray
    b: np.ndarray

    def __post_init__(self) -> None:
        a = as_cmat(self.a, "A")
        b = as_cvec(self.b, "b")
        if a.shape != (b.size, b.size):
            raise InvalidInputError(f"A has shape {a.shape} but b has length {b.size}")
        if not is_hermitian(a):
            raise InvalidInputError("A is not Hermitian")
        frobenius = float(np.linalg.norm(a))
        if frobenius > 0:
            trials = standard_complex_normal(RngStream(0).generator(), (PSD_TRIALS, b.size))
            quotients = np.real(np.sum(trials.conj() * (trials @ a.T), axis=1)) / np.sum(
                np.abs(trials) ** 2, axis=1
            )
            if quotients.min() < -PSD_TOLERANCE * frobenius:
                raise InvalidInputError("A is not positive semidefinite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def n(self) -> int:
        return self.b.size

    def objective(self, v: np.ndarray) -> float:
        return float(-np.real(np.vdot(v, self.a @ v)) + 2.0 * np.real(np.vdot(v, self.b)))


@dataclass(frozen=True, eq=False)
class HomogenizedForm:
    """
    ``Q̂ = [[A, −b], [−bᴴ, 0]]`` so that ``v̄ᴴQ̂v̄ = vᴴAv − 2Re{vᴴb}`` for ``v̄ = [v; 1]``.

    Attributes:
        q_hat: Hermitian matrix ((n+1)×(n+1))
    """

    q_hat: np.ndarray

    def __post_init__(self) -> None:
        if not is_hermitian(self.q_hat):
            raise InvalidInputError("Q_hat is not Hermitian")

    @property
    def n(self) -> int:
        return self.q_hat.shape[0] - 1

    def value(self, v_bar: np.ndarray) -> float:
        return float(np.real(np.vdot(v_bar, self.q_hat @ v_bar)))


@dataclass(frozen=True, eq=False)
class CoordinateAscentResult:
    """
    Attributes:
        v: Unit-modulus solution
        objective: Objective at v
        trace: Objective after every coordinate update, starting at v0
        sweeps: Full sweeps performed
    """

    v: np.ndarray
    objective: float
    trace: List[float] = field(default_factory=list)
    sweeps: int = 0


@dataclass(frozen=True, eq=False)
class SdrResult:
    """
    Attributes:
        v: Best unit-modulus candidate (polished)
        objective: Objective at v
        relaxation_value: ``−tr(Q̂V)`` at the relaxation solution
        factor: Row-normalized factor R with V = RRᴴ
        iterations: Factor iterations
    """

    v: np.ndarray
    objective: float
    relaxation_value: float
    factor: np.ndarray
    iterations: int


def homogenize(qf: QuadraticForm) -> HomogenizedForm:
    """Absorb the linear term with an auxiliary unit-modulus coordinate."""
    n = qf.n
    q_hat = np.zeros((n + 1, n + 1), dtype=np.complex128)
    q_hat[:n, :n] = qf.a
    q_hat[:n, n] = -qf.b
    q_hat[n, :n] = -qf.b.conj()
    return HomogenizedForm(q_hat)


def dehomogenize(v_bar: np.ndarray) -> np.ndarray:
    """Unit-modulus v from a lifted vector, with the auxiliary phase removed."""
    anchor = v_bar[-1]
    if anchor == 0:
        return unit_modulus(v_bar[:-1])
    return unit_modulus(v_bar[:-1] / anchor)


# ═══════════════════════════════════════════════════════════════════════════
# COORDINATE ASCENT
# ═══════════════════════════════════════════════════════════════════════════


def solve_coordinate_ascent(
    qf: QuadraticForm,
    v0: np.ndarray,
    tol: float = 1e-10,
    max_iter: int = 1000,
) -> CoordinateAscentResult:
    """
    Element-wise exact maximization.

    Each update sets ``v_n = c_n/|c_n|`` with ``c_n = b_n − Σ_{m≠n} A_{nm} v_m``,
    which raises the objective by ``2(|c_n| − Re{v_n* c_n}) ≥ 0``.

    Args:
        qf: Objective
        v0: Unit-modulus start
        tol: Stop once a sweep gains less than tol·(1 + |objective|)
        max_iter: Sweep cap

    Returns:
        CoordinateAscentResult

    Raises:
        InvalidInputError: If v0 is not unit-modulus
        ConvergenceError: If max_iter sweeps do not reach the tolerance
    """
    v = as_cvec(v0, "v0").copy()
    if v.size != qf.n:
        raise InvalidInputError(f"v0 has length {v.size}, expected {qf.n}")
    if np.any(np.abs(np.abs(v) - 1.0) > UNIT_MODULUS_TOLERANCE):
        raise InvalidInputError("v0 must be unit-modulus")

    a, b = qf.a, qf.b
    diagonal = np.real(np.diag(a))
    product = a @ v
    objective = qf.objective(v)
    trace = [objective]

    for sweep in range(1, max_iter + 1):
        sweep_start = objective
        for n in range(v.size):
            c = b[n] - product[n] + diagonal[n] * v[n]
            magnitude = abs(c)
            if magnitude < MIN_COORDINATE_MAGNITUDE:
                trace.append(objective)
                continue
            updated = c / magnitude
            gain = 2.0 * (magnitude - float(np.real(np.conj(v[n]) * c)))
            product += a[:, n] * (updated - v[n])
            v[n] = updated
            objective += max(gain, 0.0)
            trace.append(objective)
        if objective - sweep_start < tol * (1.0 + abs(objective)):
            return CoordinateAscentResult(v, qf.objective(v), trace, sweep)

    raise ConvergenceError(
        f"coordinate ascent did not settle in {max_iter} sweeps", trace=trace, iterate=v
    )


# ═══════════════════════════════════════════════════════════════════════════
# SEMIDEFINITE RELAXATION
# ═══════════════════════════════════════════════════════════════════════════


def _normalize_rows(rows: np.ndarray, fallback: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(rows, axis=1)
    normalized = fallback.copy()
    nonzero = norms > 0
    normalized[nonzero] = rows[nonzero] / norms[nonzero, None]
    return normalized


def _eigenvalue_ceiling(q_hat: np.ndarray) -> float:
    """An upper bound on λ_max(Q̂)."""
    gershgorin = float(np.max(np.sum(np.abs(q_hat), axis=1)))
    frobenius = float(np.linalg.norm(q_hat))
    try:
        eigenvalue, _ = hermitian_principal_eig(q_hat, tol=1e-6)
    except ConvergenceError:
        return gershgorin
    return min(gershgorin, eigenvalue + 2e-6 * frobenius)


def default_rank(n: int) -> int:
    """Factor rank for an n-variable problem: ⌈√(2(n+1))⌉, at least 2."""
    return max(2, math.ceil(math.sqrt(2 * (n + 1))))


def solve_sdr(
    qf: QuadraticForm,
    rank: Optional[int] = None,
    num_randomizations: int = 200,
    rng: RandomSource = RngStream(0),
    tol: float = 1e-12,
    max_iter: int = 50_000,
    polish: bool = True,
) -> SdrResult:
    """
    Semidefinite relaxation with Gaussian randomization.

    Solves ``min tr(Q̂V)`` over ``diag(V) = 1, V ⪰ 0`` with ``V = RRᴴ``. The
    factor takes projected gradient steps ``R ← rows_normalized((sI − Q̂)R)``
    with s ≥ λ_max(Q̂), each of which cannot increase ``tr(Q̂V)``. Candidate 0
    is the principal eigenvector of V, the rest are draws from CN(0, V).

    Args:
        qf: Objective
        rank: Factor rank, default ⌈√(2(n+1))⌉
        num_randomizations: Gaussian candidates
        rng: Random source for the initial factor and the draws
        tol: Relative stationarity tolerance on the factor objective
        max_iter: Factor iteration cap
        polish: Finish with coordinate ascent from the best candidate

    Returns:
        SdrResult

    Raises:
        InvalidInputError: If rank < 2 or num_randomizations < 1
        ConvergenceError: If the factor does not settle within max_iter
    """
    rank = default_rank(qf.n) if rank is None else rank
    if rank < 2:
        raise InvalidInputError(f"rank must be at least 2, got {rank}")
    if num_randomizations < 1:
        raise InvalidInputError("num_randomizations must be at least 1")

    q_hat = homogenize(qf).q_hat
    dim = q_hat.shape[0]
    generator = as_generator(rng)
    start = standard_complex_normal(generator, (dim, rank))
    factor = start / np.linalg.norm(start, axis=1, keepdims=True)

    lifted = _eigenvalue_ceiling(q_hat) * np.eye(dim) - q_hat
    value = float(np.real(np.sum(factor.conj() * (lifted @ factor))))
    for iteration in range(1, max_iter + 1):
        stepped = _normalize_rows(lifted @ factor, factor)
        stepped_value = float(np.real(np.sum(stepped.conj() * (lifted @ stepped))))
        factor = stepped
        if stepped_value - value <= tol * (1.0 + abs(stepped_value)):
            break
        value = stepped_value
    else:
        raise ConvergenceError(
            f"relaxation factor did not settle in {max_iter} iterations", iterate=factor
        )

    covariance = factor @ factor.conj().T
    relaxation_value = -float(np.real(np.sum(factor.conj() * (q_hat @ factor))))

    candidates = []
    try:
        _, principal = hermitian_principal_eig(covariance, tol=1e-9)
        candidates.append(principal)
    except ConvergenceError:
        logger.debug("relaxation covariance has no dominant eigenvector, using draws only")
    candidates.extend(sample_from_factor(factor, generator, num_randomizations))

    best_v, best_objective = None, -math.inf
    for candidate in candidates:
        v = dehomogenize(candidate)
        objective = qf.objective(v)
        if objective > best_objective:
            best_v, best_objective = v, objective

    if polish:
        try:
            polished = solve_coordinate_ascent(qf, best_v)
            best_v, best_objective = polished.v, polished.objective
        except ConvergenceError as exc:
            if exc.iterate is not None and qf.objective(exc.iterate) > best_objective:
                best_v, best_objective = exc.iterate, qf.objective(exc.iterate)

    logger.debug(
        "SDR: %d factor iterations, relaxation %.6g, rounded %.6g", iteration, relaxation_value, best_objective
    )
    return SdrResult(best_v, best_objective, relaxation_value, factor, iteration)
