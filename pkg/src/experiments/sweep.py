"""
Scenario Sweeps

Runs every configured scheme at every grid point of one subcommand and
writes the results. Grid points run on a thread pool. Multi-user schemes give
one row per user drop, all schemes at a grid point sharing the drops, and a
second CSV holds the drop averages.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Dict, List, Optional

from ..core.errors import AirsError, ConfigError
from ..core.multiuser_adaptive import (
    allocate_elements_search,
    rates_pirs_multiuser,
    rates_single_airs_multiuser,
    rates_user_adaptive,
    user_link_gains,
)
from ..core.single_user import (
    allocate_elements_exhaustive,
    allocate_elements_fixed,
    allocate_elements_optimal,
    distributed_rates,
    pirs_rates,
    single_airs_rates,
)
from ..core.state import AirsSide, LinkRates, SystemParams
from ..core.static_ao import AoOptions, build_static_channels, rates_static, run_alternating_optimization
from ..utils.formatting import format_float, format_runtime
from .config import SUBCOMMANDS, ScenarioConfig
from .placement import dropped_params
from .records import (
    RecordContext,
    ResultRecord,
    drop_means,
    sort_records,
    write_csv,
    write_frame,
    write_manifest,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SchemeEvaluation:
    """
    Outcome of one scheme on one scenario.

    Attributes:
        rates: Uplink/downlink sum rates
        n_u: Uplink elements, None when not applicable
        n_d: Downlink elements, None when not applicable
        iterations: Solver iterations, 0 for closed forms
    """

    rates: LinkRates
    n_u: Optional[int]
    n_d: Optional[int]
    iterations: int = 0


@dataclass(frozen=True)
class RunOutcome:
    """
    Attributes:
        records: Records in CSV order
        csv_path: Main CSV
        manifest_path: JSON manifest
        mean_path: CSV of the rates averaged over drops
    """

    records: List[ResultRecord]
    csv_path: Path
    manifest_path: Path
    mean_path: Optional[Path] = None

    @property
    def failures(self) -> int:
        return sum(1 for record in self.records if not record.ok)


def ao_options(config: ScenarioConfig, **changes) -> AoOptions:
    """AO settings taken from a scenario."""
    values = dict(
        tol=config.ao_tol,
        max_outer=config.ao_max_outer,
        method=config.qcqp_method,
        seed=config.seed,
        num_randomizations=config.num_randomizations,
    )
    values.update(changes)
    return AoOptions(**values)


def evaluate_single_user(scheme: str, params: SystemParams) -> SchemeEvaluation:
    """One user at the area center."""
    n = params.n_total
    if scheme in ("distributed-opt", "distributed-fixed", "distributed-es"):
        allocate = {
            "distributed-opt": allocate_elements_optimal,
            "distributed-fixed": allocate_elements_fixed,
            "distributed-es": allocate_elements_exhaustive,
        }[scheme]
        split = allocate(params)
        return SchemeEvaluation(distributed_rates(params, split.n_u, split.n_d), split.n_u, split.n_d)
    if scheme == "bs-side":
        return SchemeEvaluation(single_airs_rates(params, AirsSide.BS_SIDE), n, n)
    if scheme == "user-side":
        return SchemeEvaluation(single_airs_rates(params, AirsSide.USER_SIDE), n, n)
    if scheme == "pirs":
        return SchemeEvaluation(pirs_rates(params), n, n)
    raise ConfigError(f"unknown single-user scheme {scheme!r}")


def evaluate_multi_user(scheme: str, params: SystemParams, config: ScenarioConfig) -> SchemeEvaluation:
    """K placed users served in TDMA slots, or jointly by the static scheme."""
    n = params.n_total
    if scheme == "mu-static":
        channels = build_static_channels(params)
        result = run_alternating_optimization(params, channels, ao_options(config))
        rates = rates_static(result.state, channels, params).as_link_rates()
        return SchemeEvaluation(rates, n // 2, n // 2, result.iterations)
    if scheme == "bs-side":
        return SchemeEvaluation(rates_single_airs_multiuser(params, AirsSide.BS_SIDE).as_link_rates(), n, n)
    if scheme == "user-side":
        return SchemeEvaluation(rates_single_airs_multiuser(params, AirsSide.USER_SIDE).as_link_rates(), n, n)
    if scheme == "pirs":
        return SchemeEvaluation(rates_pirs_multiuser(params).as_link_rates(), n, n)

    gains = user_link_gains(params)
    if scheme == "mu-adaptive":
        split = allocate_elements_search(params, gains)
        n_u, n_d = split.n_u, split.n_d
    elif scheme == "mu-adaptive-equal":
        n_u = n // 2
        n_d = n - n_u
    elif scheme == "distributed-fixed":
        split = allocate_elements_fixed(params)
        n_u, n_d = split.n_u, split.n_d
    else:
        raise ConfigError(f"unknown multi-user scheme {scheme!r}")
    return SchemeEvaluation(rates_user_adaptive(params, gains, n_u, n_d).as_link_rates(), n_u, n_d)


def timed_record(context: RecordContext, scheme: str, evaluate: Callable[[], SchemeEvaluation]) -> ResultRecord:
    """Run one evaluation, turning library errors into an error row."""
    start = time.perf_counter()
    try:
        outcome = evaluate()
    except AirsError as exc:
        elapsed = (time.perf_counter() - start) * 1000.0
        logger.error("%s failed at %s=%s drop %d: %s", scheme, context.sweep_variable,
                     format_float(context.sweep_value), context.drop, exc)
        return context.failure(scheme, f"{type(exc).__name__}: {exc}", elapsed)
    elapsed = (time.perf_counter() - start) * 1000.0
    return context.success(scheme, outcome.rates, outcome.n_u, outcome.n_d, outcome.iterations, elapsed)


def run_grid_point(subcommand: str, config: ScenarioConfig, grid_index: int, value: float) -> List[ResultRecord]:
    """
    Every scheme at one grid point.

    Single-user subcommands give one record per scheme; multi-user ones one
    record per scheme and drop.
    """
    multi_user = SUBCOMMANDS[subcommand].multi_user
    drops = range(config.num_drops) if multi_user else range(1)
    try:
        base = config.to_system_params(value, k_users=config.k_users if multi_user else 1)
    except AirsError as exc:
        logger.error("no scenario at %s=%s: %s", config.sweep_variable, format_float(value), exc)
        epsilon = value if config.sweep_variable == "epsilon" else config.epsilon
        return [
            RecordContext(config.sweep_variable, value, grid_index, drop, config.seed, epsilon).failure(
                scheme, f"{type(exc).__name__}: {exc}"
            )
            for drop in drops
            for scheme in config.schemes
        ]
    records: List[ResultRecord] = []

    if not multi_user:
        context = RecordContext(config.sweep_variable, value, grid_index, 0, config.seed, base.epsilon)
        for scheme in config.schemes:
            records.append(timed_record(context, scheme, lambda s=scheme: evaluate_single_user(s, base)))
        return records

    for drop in drops:
        params = dropped_params(base, config.seed, grid_index, drop, config.user_radius_m)
        context = RecordContext(config.sweep_variable, value, grid_index, drop, config.seed, params.epsilon)
        for scheme in config.schemes:
            records.append(
                timed_record(context, scheme, lambda s=scheme: evaluate_multi_user(s, params, config))
            )
    return records


def output_paths(config: ScenarioConfig, subcommand: str) -> Dict[str, Path]:
    root = Path(config.output_dir)
    return {
        "csv": root / f"{subcommand}.csv",
        "manifest": root / f"{subcommand}.manifest.json",
        "mean": root / f"{subcommand}.mean.csv",
    }


def run_sweep(subcommand: str, config: ScenarioConfig) -> RunOutcome:
    """
    Run a sweep subcommand and write its CSVs and manifest.

    Args:
        subcommand: One of the sweep subcommands
        config: Effective configuration

    Returns:
        RunOutcome with the sorted records and the written paths
    """
    if subcommand not in SUBCOMMANDS or subcommand in ("rate-region", "selftest"):
        raise ConfigError(f"{subcommand!r} is not a sweep subcommand")
    grid = config.sweep_grid
    logger.info(
        "%s: %d schemes over %d values of %s", subcommand, len(config.schemes), len(grid), config.sweep_variable
    )
    start = time.perf_counter()

    def task(indexed):
        grid_index, value = indexed
        records = run_grid_point(subcommand, config, grid_index, value)
        logger.info("%s: %s=%s done", subcommand, config.sweep_variable, format_float(value))
        return records

    with ThreadPoolExecutor(max_workers=config.parallel) as executor:
        batches = list(executor.map(task, enumerate(grid)))
    records = sort_records(record for batch in batches for record in batch)

    paths = output_paths(config, subcommand)
    outputs = {
        paths["csv"].name: write_csv(records, paths["csv"]),
        paths["mean"].name: write_frame(drop_means(records), paths["mean"]),
    }
    write_manifest(paths["manifest"], subcommand, config, outputs, records)
    logger.info("%s finished in %s", subcommand, format_runtime((time.perf_counter() - start) * 1000.0))
    return RunOutcome(records, paths["csv"], paths["manifest"], paths["mean"])

