"""
Rate Region

Uplink/downlink weighted-rate pairs of the static scheme across the
downlink weight: the joint design, the fixed-UL and fixed-DL designs, and
the per-user dedicated (individual) design as an upper bound.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd

from ..core.errors import AirsError, ConfigError
from ..core.multiuser_adaptive import rates_user_adaptive, user_link_gains
from ..core.state import SystemParams
from ..core.static_ao import (
    StaticChannels,
    build_static_channels,
    complete_blocks,
    rates_static,
    run_alternating_optimization,
)
from ..utils.formatting import format_runtime
from .config import ScenarioConfig
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
from .sweep import RunOutcome, SchemeEvaluation, ao_options, output_paths, timed_record

logger = logging.getLogger(__name__)

SUBCOMMAND = "rate-region"
REGION_COLUMNS = ["scheme", "epsilon", "drop", "ul_weighted_rate", "dl_weighted_rate", "wsr_bpshz"]


@dataclass(frozen=True)
class RegionOutcome(RunOutcome):
    """
    Attributes:
        region: One row per (scheme, epsilon, drop) with the weighted-rate pair
        region_path: Region CSV
    """

    region: Optional[pd.DataFrame] = None
    region_path: Optional[Path] = None


@dataclass(frozen=True)
class FixedDesigns:
    """Phases optimized for the uplink alone and the downlink alone on one drop."""

    channels: StaticChannels
    uplink_phase: np.ndarray
    downlink_phase: np.ndarray
    iterations: int


def fixed_designs(params: SystemParams, config: ScenarioConfig) -> FixedDesigns:
    """AO at epsilon 0 and at epsilon 1; the other blocks follow in closed form at any weight."""
    channels = build_static_channels(params)
    options = ao_options(config)
    uplink = run_alternating_optimization(params.replace(epsilon=0.0), channels, options)
    downlink = run_alternating_optimization(params.replace(epsilon=1.0), channels, options)
    return FixedDesigns(
        channels, uplink.state.phase, downlink.state.phase, uplink.iterations + downlink.iterations
    )


def evaluate_region_point(
    scheme: str, params: SystemParams, designs: FixedDesigns, config: ScenarioConfig
) -> SchemeEvaluation:
    """One region scheme at the weight in ``params``."""
    channels = designs.channels
    n = params.n_total
    if scheme == "rate-region-individual":
        rates = rates_user_adaptive(params, user_link_gains(params), n // 2, n - n // 2).as_link_rates()
        return SchemeEvaluation(rates, n // 2, n - n // 2)

    uplink_state = complete_blocks(designs.uplink_phase, channels, params)
    downlink_state = complete_blocks(designs.downlink_phase, channels, params)
    if scheme == "rate-region-fixed-ul":
        return SchemeEvaluation(rates_static(uplink_state, channels, params).as_link_rates(), n // 2, n // 2)
    if scheme == "rate-region-fixed-dl":
        return SchemeEvaluation(rates_static(downlink_state, channels, params).as_link_rates(), n // 2, n // 2)

    uplink_wsr = rates_static(uplink_state, channels, params).wsr
    downlink_wsr = rates_static(downlink_state, channels, params).wsr
    warm = designs.uplink_phase if uplink_wsr >= downlink_wsr else designs.downlink_phase
    result = run_alternating_optimization(params, channels, ao_options(config, initial_phase=warm))
    rates = rates_static(result.state, channels, params).as_link_rates()
    return SchemeEvaluation(rates, n // 2, n // 2, result.iterations)


def run_region_drop(config: ScenarioConfig, drop: int) -> List[ResultRecord]:
    """Every region scheme at every weight for one user drop."""
    records = []
    try:
        base = config.to_system_params(k_users=config.k_users)
        params = dropped_params(base, config.seed, 0, drop, config.user_radius_m)
        designs = fixed_designs(params, config)
    except AirsError as exc:
        logger.error("%s: setup failed on drop %d: %s", SUBCOMMAND, drop, exc)
        designs, error = None, f"{type(exc).__name__}: {exc}"
    for grid_index, epsilon in enumerate(config.sweep_grid):
        context = RecordContext("epsilon", epsilon, grid_index, drop, config.seed, float(epsilon))
        if designs is None:
            records.extend(context.failure(scheme, error) for scheme in config.schemes)
            continue
        point = params.replace(epsilon=float(epsilon))
        for scheme in config.schemes:
            records.append(
                timed_record(context, scheme, lambda s=scheme: evaluate_region_point(s, point, designs, config))
            )
    logger.info("%s: drop %d done", SUBCOMMAND, drop)
    return records


def region_frame(records: List[ResultRecord]) -> pd.DataFrame:
    """Weighted-rate pairs ``((1-eps)·R_UL, eps·R_DL)`` of every successful record."""
    rows = [
        {
            "scheme": record.scheme,
            "epsilon": record.epsilon,
            "drop": record.drop,
            "ul_weighted_rate": (1.0 - record.epsilon) * record.ul_rate,
            "dl_weighted_rate": record.epsilon * record.dl_rate,
            "wsr_bpshz": record.wsr_bpshz,
        }
        for record in records
        if record.ok
    ]
    return pd.DataFrame(rows, columns=REGION_COLUMNS)


def run_rate_region(config: ScenarioConfig) -> RegionOutcome:
    """
    Run the rate-region subcommand over ``config.sweep_grid`` (epsilon values).

    Every drop first optimizes the fixed-UL and fixed-DL phases once; the
    joint design at each weight starts from whichever of the two scores the
    larger WSR there, so it never falls below either.

    Returns:
        RegionOutcome with the records, region table and written paths
    """
    if config.sweep_variable != "epsilon":
        raise ConfigError(f"rate-region sweeps epsilon, not {config.sweep_variable}")
    start = time.perf_counter()
    with ThreadPoolExecutor(max_workers=config.parallel) as executor:
        batches = list(executor.map(lambda drop: run_region_drop(config, drop), range(config.num_drops)))
    records = sort_records(record for batch in batches for record in batch)
    region = region_frame(records)

    paths = output_paths(config, SUBCOMMAND)
    region_path = paths["csv"].with_name(f"{SUBCOMMAND}.region.csv")
    outputs = {
        paths["csv"].name: write_csv(records, paths["csv"]),
        region_path.name: write_frame(region, region_path),
        paths["mean"].name: write_frame(drop_means(records), paths["mean"]),
    }
    write_manifest(paths["manifest"], SUBCOMMAND, config, outputs, records)
    logger.info("%s finished in %s", SUBCOMMAND, format_runtime((time.perf_counter() - start) * 1000.0))
    return RegionOutcome(
        records, paths["csv"], paths["manifest"], paths["mean"], region=region, region_path=region_path
    )
