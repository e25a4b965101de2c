#!/usr/bin/env python3
"""
airs-wsr - Command-Line Entry Point

Runs the experiment subcommands and writes their CSV results.
Run with: python -m src.main <subcommand> [options]
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Add src to path for proper imports when running directly
src_path = Path(__file__).parent
if str(src_path) not in sys.path:
    sys.path.insert(0, str(src_path.parent))

from src import __version__
from src.core.errors import ConfigError
from src.experiments.config import SUBCOMMANDS, load_config
from src.experiments.rate_region import run_rate_region
from src.experiments.selftest import run_selftest
from src.experiments.sweep import run_sweep

logger = logging.getLogger("airs_wsr")

EXIT_OK = 0
EXIT_FAILURES = 1
EXIT_CONFIG = 2

DESCRIPTIONS = {
    "single-n-sweep": "Single-user WSR of every deployment versus the element budget N",
    "single-eps-sweep": "Single-user WSR of every deployment versus the downlink weight",
    "alloc-curve": "Optimal, near-optimal and exhaustive element splits versus N",
    "mu-adaptive": "Multi-user TDMA with user-adaptive beamforming versus N",
    "mu-static": "Static shared-phase beamforming versus user-adaptive with equal split",
    "rate-region": "Uplink/downlink weighted-rate region of the static designs",
    "selftest": "Run the oracle self-test suite",
}


def build_parser() -> argparse.ArgumentParser:
    """Create the argument parser with one subparser per subcommand."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="key = value scenario file")
    common.add_argument("--out", help="output directory (overrides config and AIRS_WSR_OUTPUT_DIR)")
    common.add_argument("--seed", type=int, help="base seed of every random stream")
    common.add_argument("--parallel", type=int, help="worker threads")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging")

    parser = argparse.ArgumentParser(
        prog="airs-wsr",
        description="Weighted-sum-rate experiments for distributed active IRS deployments",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="subcommand", required=True, metavar="SUBCOMMAND")
    for name in SUBCOMMANDS:
        subparsers.add_parser(name, parents=[common], help=DESCRIPTIONS[name], description=DESCRIPTIONS[name])
    return parser


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s - %(levelname)s - %(message)s",
    )


def run(subcommand: str, args: argparse.Namespace) -> int:
    """Execute one subcommand and map its outcome to an exit code."""
    overrides = {"seed": args.seed, "output_dir": args.out, "parallel": args.parallel}
    config = load_config(subcommand, args.config, overrides)

    if subcommand == "selftest":
        outcome = run_selftest(config)
        failed = [result.check for result in outcome.results if not result.passed]
        if failed:
            logger.error("self-test failed: %s", ", ".join(failed))
            return EXIT_FAILURES
        logger.info("self-test passed (%d checks)", len(outcome.results))
        return EXIT_OK

    outcome = run_rate_region(config) if subcommand == "rate-region" else run_sweep(subcommand, config)
    if outcome.failures:
        logger.error("%d of %d rows recorded an error", outcome.failures, len(outcome.records))
        return EXIT_FAILURES
    return EXIT_OK


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the command line."""
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return run(args.subcommand, args)
    except ConfigError as exc:
        logger.error("configuration error: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
