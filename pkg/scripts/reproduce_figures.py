#!/usr/bin/env python3
"""
Figure Reproduction Script for airs-wsr

Runs every figure subcommand in turn and collects the CSVs in one
directory, using the sample configs in configs/ when present.

Usage:
    python scripts/reproduce_figures.py [--out DIR] [--seed N] [--parallel N] [--only NAME ...]

Options:
    --out        Output directory (default: results)
    --seed       Base seed passed to every subcommand
    --parallel   Worker threads per subcommand
    --only       Run only the named subcommands
    --clean      Remove the output directory first
"""

import argparse
import shutil
import subprocess
import sys
from pathlib import Path
from typing import List, Optional

FIGURE_SUBCOMMANDS = [
    "single-n-sweep",
    "single-eps-sweep",
    "alloc-curve",
    "mu-adaptive",
    "mu-static",
    "rate-region",
]


def get_project_root() -> Path:
    """Get the project root directory."""
    return Path(__file__).parent.parent


def build_command(
    project_root: Path,
    subcommand: str,
    out: Path,
    seed: Optional[int],
    parallel: Optional[int],
) -> List[str]:
    """
    Command line for one subcommand.

    Args:
        project_root: Project root directory
        subcommand: CLI subcommand
        out: Output directory
        seed: Base seed, None for the config value
        parallel: Worker threads, None for the config value

    Returns:
        Argument list for subprocess
    """
    cmd = [sys.executable, "-m", "src.main", subcommand, "--out", str(out)]
    config = project_root / "configs" / f"{subcommand}.conf"
    if config.exists():
        cmd.extend(["--config", str(config)])
    if seed is not None:
        cmd.extend(["--seed", str(seed)])
    if parallel is not None:
        cmd.extend(["--parallel", str(parallel)])
    return cmd


def main():
    """Main entry point."""
    parser = argparse.ArgumentParser(description="Reproduce every airs-wsr figure design")
    parser.add_argument("--out", type=Path, default=Path("results"), help="Output directory")
    parser.add_argument("--seed", type=int, help="Base seed")
    parser.add_argument("--parallel", type=int, help="Worker threads per subcommand")
    parser.add_argument("--only", nargs="+", choices=FIGURE_SUBCOMMANDS, help="Subcommands to run")
    parser.add_argument("--clean", action="store_true", help="Remove the output directory first")
    args = parser.parse_args()

    project_root = get_project_root()
    out = args.out if args.out.is_absolute() else project_root / args.out
    if args.clean and out.exists():
        print(f"Cleaning {out}...")
        shutil.rmtree(out)

    failed = []
    for subcommand in args.only or FIGURE_SUBCOMMANDS:
        cmd = build_command(project_root, subcommand, out, args.seed, args.parallel)
        print(f"Running: {' '.join(cmd)}")
        result = subprocess.run(cmd, cwd=project_root)
        if result.returncode != 0:
            failed.append(f"{subcommand} (exit {result.returncode})")

    print()
    print("=" * 60)
    if failed:
        print("FAILED: " + ", ".join(failed))
        print("=" * 60)
        sys.exit(1)
    print(f"All figure data written to {out}")
    print("=" * 60)


if __name__ == "__main__":
    main()
