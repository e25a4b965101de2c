"""
Self-Test

A reduced oracle suite that checks the library against independent
references: matrix-evaluated rates, exhaustive allocation and phase-grid
searches, and the structural properties of the alternating optimization.
Each check becomes one row of ``selftest.csv``.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, List

import numpy as np
import pandas as pd

from ..core.channel import Geometry
from ..core.matrix_rates import matrix_link_snrs
from ..core.numerics import RngStream, standard_complex_normal, unit_modulus
from ..core.qcqp_solver import QuadraticForm, solve_coordinate_ascent, solve_sdr
from ..core.single_user import (
    allocate_elements_exhaustive,
    allocate_elements_fixed,
    allocate_elements_optimal,
    distributed_rates,
    pirs_rates,
    single_airs_rates,
    wsr_coefficients,
    wsr_pirs_baseline,
    wsr_single_airs,
)
from ..core.state import AirsSide, SystemParams
from ..core.static_ao import (
    AoOptions,
    build_static_channels,
    constraint_slacks,
    phase_grid_search,
    run_alternating_optimization,
)
from ..utils.formatting import dbm_to_mw
from .config import ScenarioConfig
from .placement import place_users
from .records import write_frame

logger = logging.getLogger(__name__)

SELFTEST_COLUMNS = ["check", "value", "threshold", "passed"]


@dataclass(frozen=True)
class CheckResult:
    """
    Attributes:
        check: Check name
        value: Measured quantity
        threshold: Bound the quantity is compared with
        passed: Whether the bound holds
    """

    check: str
    value: float
    threshold: float
    passed: bool


@dataclass(frozen=True)
class SelftestOutcome:
    results: List[CheckResult]
    csv_path: Path

    @property
    def passed(self) -> bool:
        return all(result.passed for result in self.results)


def _at_most(check: str, value: float, threshold: float) -> CheckResult:
    return CheckResult(check, float(value), threshold, bool(value <= threshold))


def _at_least(check: str, value: float, threshold: float) -> CheckResult:
    return CheckResult(check, float(value), threshold, bool(value >= threshold))


def random_scenario(generator: np.random.Generator) -> SystemParams:
    """Powers, array sizes, weight and geometry drawn over the evaluation ranges."""
    d_m = float(generator.uniform(50.0, 500.0))
    h_m = float(generator.uniform(5.0, 30.0))
    return SystemParams.default(
        p_u_mw=dbm_to_mw(generator.uniform(0.0, 30.0)),
        p_b_mw=dbm_to_mw(generator.uniform(10.0, 40.0)),
        p_f_mw=dbm_to_mw(generator.uniform(-10.0, 10.0)),
        m=int(generator.integers(1, 9)),
        n_total=int(generator.integers(2, 129)),
        epsilon=float(generator.uniform()),
        geometry=Geometry.standard(d_m, h_m),
    )


def _relative_error(a: float, b: float) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def check_closed_forms(seed: int, count: int = 50) -> CheckResult:
    """Closed-form SNRs of every deployment against matrices built from positions."""
    worst = 0.0
    for index in range(count):
        params = random_scenario(RngStream(seed, index).generator())
        geometry = params.geometry
        user = geometry.user_positions[0]
        n = params.n_total
        n_u = 1 + index % (n - 1)
        pairs = [
            (distributed_rates(params, n_u, n - n_u),
             matrix_link_snrs(params, geometry.bs_airs_position, geometry.user_airs_position, user, n_u, n - n_u)),
            (single_airs_rates(params, AirsSide.BS_SIDE),
             matrix_link_snrs(params, geometry.bs_airs_position, geometry.bs_airs_position, user, n, n)),
            (single_airs_rates(params, AirsSide.USER_SIDE),
             matrix_link_snrs(params, geometry.user_airs_position, geometry.user_airs_position, user, n, n)),
            (pirs_rates(params),
             matrix_link_snrs(params, geometry.pirs_position, geometry.pirs_position, user, n, n, passive=True)),
        ]
        for closed, (snr_ul, snr_dl) in pairs:
            worst = max(
                worst,
                _relative_error(float(closed.snr_ul[0]), snr_ul),
                _relative_error(float(closed.snr_dl[0]), snr_dl),
            )
    return _at_most("closed_form_vs_matrix", worst, 1e-9)


def check_allocation(seed: int, count: int = 100) -> CheckResult:
    """Threshold-rule split against the exhaustive scan, N ≤ 64."""
    mismatches = 0
    for index in range(count):
        generator = RngStream(seed, 1000 + index).generator()
        params = random_scenario(generator).replace(n_total=int(generator.integers(2, 65)))
        if allocate_elements_optimal(params).n_d != allocate_elements_exhaustive(params).n_d:
            mismatches += 1
    return _at_most("allocation_vs_exhaustive", mismatches, 0)


def check_near_optimal() -> CheckResult:
    """round(eps·N) split at high SNR against the exhaustive optimum."""
    worst = 0.0
    for epsilon, n in itertools.product((0.2, 0.4, 0.6, 0.8), (32, 64, 128)):
        params = SystemParams.default(p_f_mw=10.0, p_u_mw=100.0, p_b_mw=100.0, epsilon=epsilon, n_total=n)
        best = allocate_elements_exhaustive(params).wsr_bpshz
        worst = max(worst, (best - allocate_elements_fixed(params).wsr_bpshz) / best)
    return _at_most("near_optimal_gap", worst, 0.02)


def check_deployment_ordering() -> CheckResult:
    """Distributed ≥ best single AIRS ≥ PIRS over the N grid at the defaults."""
    margin = math.inf
    for n in range(20, 201, 20):
        params = SystemParams.default(n_total=n)
        single = max(wsr_single_airs(params, AirsSide.BS_SIDE), wsr_single_airs(params, AirsSide.USER_SIDE))
        distributed = allocate_elements_optimal(params).wsr_bpshz
        margin = min(margin, distributed - single, single - wsr_pirs_baseline(params))
    return _at_least("deployment_ordering_margin", margin, -1e-12)


def check_threshold_gap() -> CheckResult:
    """Doubling M, N, P_F, P_U or P_B widens the interval (W1, W2)."""
    params = SystemParams.default()
    base = wsr_coefficients(params)
    gap = base.w2 - base.w1
    increases = []
    for name in ("m", "n_total", "p_f_mw", "p_u_mw", "p_b_mw"):
        doubled = wsr_coefficients(params.replace(**{name: 2 * getattr(params, name)}))
        increases.append(doubled.w2 - doubled.w1 - gap)
    return CheckResult("threshold_gap_increase", min(increases), 0.0, min(increases) > 0.0)


def random_quadratic_form(generator: np.random.Generator, n: int = 3) -> QuadraticForm:
    """PSD A of unit scale with a linear term that dominates it."""
    x = standard_complex_normal(generator, (n, n)) / math.sqrt(n)
    b = 2.0 * standard_complex_normal(generator, n)
    return QuadraticForm(x @ x.conj().T, b)


def phase_grid_optimum(qf: QuadraticForm, points: int = 64) -> float:
    """Best objective over a uniform phase grid per coordinate."""
    grid = np.exp(2j * np.pi * np.arange(points) / points)
    candidates = np.array(np.meshgrid(*([grid] * qf.n), indexing="ij")).reshape(qf.n, -1).T
    quadratic = np.real(np.sum(candidates.conj() * (candidates @ qf.a.T), axis=1))
    linear = np.real(candidates.conj() @ qf.b)
    return float(np.max(-quadratic + 2.0 * linear))


def coordinate_ascent_multistart(qf: QuadraticForm, generator: np.random.Generator, starts: int = 8) -> float:
    """Best coordinate-ascent objective from the b-aligned start and random starts."""
    initial = [unit_modulus(qf.b)] + [unit_modulus(standard_complex_normal(generator, qf.n)) for _ in range(starts)]
    return max(solve_coordinate_ascent(qf, v0).objective for v0 in initial)


def check_qcqp(seed: int, count: int = 10) -> List[CheckResult]:
    """Both QCQP solvers against the 64-point phase grid; SDR rounding below its relaxation."""
    worst_ca = worst_sdr = 0.0
    worst_bound = -math.inf
    for index in range(count):
        generator = RngStream(seed, 2000 + index).generator()
        qf = random_quadratic_form(generator)
        reference = phase_grid_optimum(qf)
        scale = max(abs(reference), 1e-12)
        worst_ca = max(worst_ca, (reference - coordinate_ascent_multistart(qf, generator)) / scale)
        sdr = solve_sdr(qf, rng=generator)
        worst_sdr = max(worst_sdr, (reference - sdr.objective) / scale)
        worst_bound = max(worst_bound, (sdr.objective - sdr.relaxation_value) / (1.0 + abs(sdr.relaxation_value)))
    return [
        _at_most("qcqp_coordinate_ascent_gap", worst_ca, 0.01),
        _at_most("qcqp_sdr_gap", worst_sdr, 0.01),
        _at_most("qcqp_sdr_relaxation_bound", worst_bound, 1e-6),
    ]


def check_alternating_optimization(seed: int) -> List[CheckResult]:
    """One K=2, M=4, N=16 run: monotone traces, feasibility and transform tightness."""
    base = SystemParams.default(m=4, n_total=16)
    params = base.with_users(place_users(RngStream(seed, 3000), base, count=2))
    channels = build_static_channels(params)
    result = run_alternating_optimization(params, channels, AoOptions())
    traces = [result.outer_trace] + result.inner_traces
    smallest_step = min((float(np.min(np.diff(trace))) for trace in traces if len(trace) > 1), default=0.0)
    scale = 1.0 + abs(result.wsr)
    return [
        _at_least("ao_trace_min_step", smallest_step, -1e-12),
        _at_least("ao_min_constraint_slack", min(constraint_slacks(result.state, channels, params).values()), -1e-9),
        _at_most("ao_ldt_gap", max(result.ldt_gaps, default=0.0) / scale, 1e-9),
        _at_most("ao_qt_gap", max(result.qt_gaps, default=0.0) / scale, 1e-9),
        CheckResult("ao_converged", float(result.iterations), 50.0, result.converged),
    ]


def check_phase_grid() -> CheckResult:
    """K=1, M=2, N_s=4: AO against an 8-point-per-element phase grid."""
    params = SystemParams.default(m=2, n_total=8)
    channels = build_static_channels(params)
    _, best = phase_grid_search(channels, params, points_per_element=8)
    ao = run_alternating_optimization(params, channels).wsr
    return _at_most("ao_vs_phase_grid_gap", (best - ao) / best, 0.05)


def run_selftest(config: ScenarioConfig) -> SelftestOutcome:
    """
    Run every check and write ``<output_dir>/selftest.csv``.

    Returns:
        SelftestOutcome; ``passed`` is True only if every check holds
    """
    seed = config.seed
    checks: List[Callable[[], object]] = [
        lambda: check_closed_forms(seed),
        lambda: check_allocation(seed),
        check_near_optimal,
        check_deployment_ordering,
        check_threshold_gap,
        lambda: check_qcqp(seed),
        lambda: check_alternating_optimization(seed),
        check_phase_grid,
    ]
    results: List[CheckResult] = []
    for check in checks:
        outcome = check()
        results.extend(outcome if isinstance(outcome, list) else [outcome])

    for result in results:
        level = logging.INFO if result.passed else logging.ERROR
        logger.log(level, "%-30s %.6g (threshold %.3g) %s", result.check, result.value, result.threshold,
                   "ok" if result.passed else "FAILED")

    frame = pd.DataFrame([vars(result) for result in results], columns=SELFTEST_COLUMNS)
    path = Path(config.output_dir) / "selftest.csv"
    write_frame(frame, path)
    return SelftestOutcome(results, path)
