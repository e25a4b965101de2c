"""
Result Records

Rows produced by the sweeps and their persistent form: a CSV with a fixed
column order and 9 significant digits, written atomically, plus a JSON
manifest echoing the configuration and indexing every record.
"""

import hashlib
import json
import logging
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Union

import pandas as pd

from .. import __version__
from ..core.state import LinkRates
from ..utils.formatting import FLOAT_FORMAT
from .config import ScenarioConfig

logger = logging.getLogger(__name__)

CSV_COLUMNS = (
    "scheme",
    "sweep_variable",
    "sweep_value",
    "grid_index",
    "drop",
    "seed",
    "epsilon",
    "wsr_bpshz",
    "ul_rate",
    "dl_rate",
    "n_u",
    "n_d",
    "iterations",
    "error",
)
INTEGER_COLUMNS = ("n_u", "n_d", "iterations")


@dataclass(frozen=True)
class ResultRecord:
    """
    One (scheme, grid point, drop) evaluation.

    Attributes:
        scheme: Scheme name
        sweep_variable: Swept parameter
        sweep_value: Its value at this grid point
        grid_index: Position in the grid
        drop: User drop index (0 for single-user schemes)
        seed: Base seed of the run
        epsilon: Downlink weight
        wsr_bpshz: Weighted sum rate, NaN on error
        ul_rate: Uplink sum rate, NaN on error
        dl_rate: Downlink sum rate, NaN on error
        n_u: Uplink elements, None when not applicable
        n_d: Downlink elements, None when not applicable
        iterations: Solver iterations (0 for closed forms)
        error: Error text, empty on success
        runtime_ms: Wall time of the evaluation, kept out of the CSV
    """

    scheme: str
    sweep_variable: str
    sweep_value: float
    grid_index: int
    drop: int
    seed: int
    epsilon: float
    wsr_bpshz: float
    ul_rate: float
    dl_rate: float
    n_u: Optional[int]
    n_d: Optional[int]
    iterations: Optional[int]
    error: str = ""
    runtime_ms: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.error

    @property
    def sort_key(self):
        return (self.scheme, self.grid_index, self.drop)

    def row(self) -> Dict[str, Any]:
        return {column: getattr(self, column) for column in CSV_COLUMNS}


@dataclass(frozen=True)
class RecordContext:
    """Where a record sits in the sweep."""

    sweep_variable: str
    sweep_value: float
    grid_index: int
    drop: int
    seed: int
    epsilon: float

    def success(
        self,
        scheme: str,
        rates: LinkRates,
        n_u: Optional[int],
        n_d: Optional[int],
        iterations: int = 0,
        runtime_ms: float = 0.0,
    ) -> ResultRecord:
        return ResultRecord(
            scheme, self.sweep_variable, self.sweep_value, self.grid_index, self.drop, self.seed,
            self.epsilon, rates.wsr, rates.ul_rate, rates.dl_rate, n_u, n_d, iterations,
            runtime_ms=runtime_ms,
        )

    def failure(self, scheme: str, error: str, runtime_ms: float = 0.0) -> ResultRecord:
        nan = math.nan
        return ResultRecord(
            scheme, self.sweep_variable, self.sweep_value, self.grid_index, self.drop, self.seed,
            self.epsilon, nan, nan, nan, None, None, None, error=error, runtime_ms=runtime_ms,
        )


def sort_records(records: Iterable[ResultRecord]) -> List[ResultRecord]:
    return sorted(records, key=lambda record: record.sort_key)


def records_frame(records: Sequence[ResultRecord]) -> pd.DataFrame:
    """Records as a DataFrame in CSV column order, integer columns nullable."""
    frame = pd.DataFrame([record.row() for record in records], columns=list(CSV_COLUMNS))
    for column in INTEGER_COLUMNS:
        frame[column] = frame[column].astype("Int64")
    return frame


MEAN_COLUMNS = (
    "scheme",
    "sweep_variable",
    "sweep_value",
    "grid_index",
    "epsilon",
    "drops",
    "failures",
    "wsr_bpshz",
    "ul_rate",
    "dl_rate",
)
MEAN_KEYS = ["scheme", "sweep_variable", "sweep_value", "grid_index", "epsilon"]


def drop_means(records: Sequence[ResultRecord]) -> pd.DataFrame:
    """
    Rates averaged over the drops of every (scheme, grid point).

    Failed drops are left out of the means; ``drops`` counts the ones used
    and ``failures`` the rest. Rows keep the order of ``records``.
    """
    frame = records_frame(records)
    grouped = frame.groupby(MEAN_KEYS, sort=False)
    means = grouped[["wsr_bpshz", "ul_rate", "dl_rate"]].mean()
    means["drops"] = grouped["wsr_bpshz"].count()
    means["failures"] = grouped.size() - means["drops"]
    return means.reset_index()[list(MEAN_COLUMNS)]


def git_blob_sha1(data: bytes) -> str:
    """Content hash computed the way git hashes a blob."""
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


def _atomic_write(path: Path, data: bytes) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temporary = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(handle, "wb") as stream:
            stream.write(data)
        os.replace(temporary, path)
    except BaseException:
        if os.path.exists(temporary):
            os.unlink(temporary)
        raise


def write_frame(frame: pd.DataFrame, path: Union[str, Path]) -> str:
    """
    Write a DataFrame as CSV atomically.

    Floats use 9 significant digits and lines end in LF.

    Returns:
        git blob hash of the written bytes
    """
    text = frame.to_csv(index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    data = text.encode("utf-8")
    _atomic_write(Path(path), data)
    logger.info("wrote %s (%d rows)", path, len(frame))
    return git_blob_sha1(data)


def write_csv(records: Sequence[ResultRecord], path: Union[str, Path]) -> str:
    return write_frame(records_frame(records), path)


def write_manifest(
    path: Union[str, Path],
    subcommand: str,
    config: ScenarioConfig,
    outputs: Dict[str, str],
    records: Sequence[ResultRecord],
) -> None:
    """
    Write the JSON manifest of one run.

    Args:
        path: Manifest file
        subcommand: CLI subcommand
        config: Effective configuration
        outputs: File name to content hash of every file written
        records: Records in CSV order
    """
    manifest = {
        "subcommand": subcommand,
        "version": __version__,
        "config": config.as_dict(),
        "outputs": outputs,
        "records": [
            {
                "row": index,
                "scheme": record.scheme,
                "grid_index": record.grid_index,
                "drop": record.drop,
                "runtime_ms": round(record.runtime_ms, 3),
                "error": record.error,
            }
            for index, record in enumerate(records)
        ],
    }
    data = (json.dumps(manifest, indent=2, sort_keys=True) + "\n").encode("utf-8")
    _atomic_write(Path(path), data)
    logger.info("wrote %s", path)
