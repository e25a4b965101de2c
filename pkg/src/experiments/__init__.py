"""Experiment harness: configuration, user drops, sweeps, rate region and self-test."""

from .config import SUBCOMMANDS, ScenarioConfig, load_config, parse_grid
from .placement import place_users
from .rate_region import RegionOutcome, run_rate_region
from .records import CSV_COLUMNS, ResultRecord, write_csv, write_manifest
from .selftest import CheckResult, SelftestOutcome, run_selftest
from .sweep import RunOutcome, run_sweep

__all__ = [
    "SUBCOMMANDS",
    "ScenarioConfig",
    "load_config",
    "parse_grid",
    "place_users",
    "RegionOutcome",
    "run_rate_region",
    "CSV_COLUMNS",
    "ResultRecord",
    "write_csv",
    "write_manifest",
    "CheckResult",
    "SelftestOutcome",
    "run_selftest",
    "RunOutcome",
    "run_sweep",
]
