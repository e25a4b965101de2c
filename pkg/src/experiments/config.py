"""
Scenario Configuration

Flat ``key = value`` config files for the experiment subcommands, the
per-subcommand defaults, and the conversion from dBm/meters to the mW and
linear-gain ``SystemParams`` used by the library.
"""

import math
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Dict, Mapping, Optional, Tuple, Union

from ..core.channel import Geometry
from ..core.errors import ConfigError
from ..core.state import QcqpMethod, SystemParams
from ..utils.formatting import db_to_linear, dbm_to_mw

OUTPUT_DIR_ENV = "AIRS_WSR_OUTPUT_DIR"

SWEEP_VARIABLES = ("n_total", "epsilon", "m", "p_f_dbm", "p_u_dbm", "p_b_dbm")
INTEGER_SWEEPS = ("n_total", "m")

SINGLE_USER_SCHEMES = (
    "distributed-opt",
    "distributed-fixed",
    "distributed-es",
    "bs-side",
    "user-side",
    "pirs",
)
MULTI_USER_SCHEMES = (
    "mu-adaptive",
    "mu-adaptive-equal",
    "mu-static",
    "distributed-fixed",
    "bs-side",
    "user-side",
    "pirs",
)
REGION_SCHEMES = (
    "rate-region-joint",
    "rate-region-individual",
    "rate-region-fixed-ul",
    "rate-region-fixed-dl",
)


@dataclass(frozen=True)
class SubcommandDefaults:
    """
    Defaults one subcommand applies before the config file.

    Attributes:
        sweep_variable: Swept parameter
        sweep_grid: Grid expression
        schemes: Schemes evaluated at every grid point
        allowed_schemes: Schemes this subcommand can run
        multi_user: Whether users are dropped in the disk
        overrides: Other keys changed from the global defaults
    """

    sweep_variable: str
    sweep_grid: str
    schemes: Tuple[str, ...]
    allowed_schemes: Tuple[str, ...]
    multi_user: bool
    overrides: Mapping[str, Any] = field(default_factory=dict)


SUBCOMMANDS: Dict[str, SubcommandDefaults] = {
    "single-n-sweep": SubcommandDefaults(
        "n_total", "20:200:20",
        ("distributed-opt", "distributed-fixed", "bs-side", "user-side", "pirs"),
        SINGLE_USER_SCHEMES, multi_user=False,
    ),
    "single-eps-sweep": SubcommandDefaults(
        "epsilon", "0:1:0.1",
        ("distributed-opt", "distributed-fixed", "bs-side", "user-side", "pirs"),
        SINGLE_USER_SCHEMES, multi_user=False,
    ),
    "alloc-curve": SubcommandDefaults(
        "n_total", "20:200:20",
        ("distributed-opt", "distributed-fixed", "distributed-es"),
        SINGLE_USER_SCHEMES, multi_user=False,
    ),
    "mu-adaptive": SubcommandDefaults(
        "n_total", "20:200:20",
        ("mu-adaptive", "distributed-fixed", "bs-side", "user-side", "pirs"),
        MULTI_USER_SCHEMES, multi_user=True,
    ),
    "mu-static": SubcommandDefaults(
        "n_total", "8:64:8",
        ("mu-static", "mu-adaptive-equal"),
        MULTI_USER_SCHEMES, multi_user=True,
    ),
    "rate-region": SubcommandDefaults(
        "epsilon", "0:1:0.1",
        REGION_SCHEMES,
        REGION_SCHEMES, multi_user=True,
        overrides={"n_total": 32, "k_users": 2},
    ),
    "selftest": SubcommandDefaults(
        "n_total", "20:200:20", ("distributed-opt",), SINGLE_USER_SCHEMES, multi_user=False
    ),
}


def parse_grid(text: str) -> Tuple[float, ...]:
    """
    Parse a sweep grid.

    Args:
        text: ``start:stop:step`` (stop included when reached) or a comma list

    Returns:
        Grid values in the given order

    Raises:
        ConfigError: If the expression is malformed or empty
    """
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(part) for part in text.split(":"))
        else:
            values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse grid {text!r}: {exc}") from exc
    if ":" in text:
        if step <= 0 or stop < start:
            raise ConfigError(f"grid {text!r} needs step > 0 and stop >= start")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return tuple(round(start + i * step, 12) for i in range(count))
    if not values:
        raise ConfigError("sweep grid is empty")
    return values


def _parse_position(text: str) -> Tuple[float, float, float]:
    parts = [float(part) for part in text.split(",")]
    if len(parts) != 3:
        raise ValueError(f"expected three coordinates, got {len(parts)}")
    return (parts[0], parts[1], parts[2])


def _parse_schemes(text: str) -> Tuple[str, ...]:
    return tuple(part.strip() for part in text.split(",") if part.strip())


@dataclass(frozen=True)
class ScenarioConfig:
    """
    One experiment run, in the units of the config file.

    Attributes:
        p_u_dbm: User transmit power
        p_b_dbm: BS transmit power
        p_f_dbm: AIRS amplification power
        sigma_f_dbm: AIRS noise power
        sigma_0_dbm: Receiver noise power
        m: BS antennas
        n_total: Total AIRS elements
        epsilon: Downlink weight
        k_users: Users in multi-user subcommands
        d_m: BS-user ground distance
        h_m: AIRS height
        beta_db: Reference channel gain at 1 m
        pirs_position_m: PIRS position, None for (0, 0, H)
        user_radius_m: Radius of the user disk
        num_drops: User drops per grid point
        sweep_variable: Swept parameter
        sweep_grid: Values of the swept parameter
        schemes: Schemes to evaluate
        seed: Base seed of every random stream
        qcqp_method: Phase subproblem solver
        num_randomizations: SDR Gaussian candidates
        ao_tol: AO outer tolerance (bps/Hz)
        ao_max_outer: AO outer iteration cap
        output_dir: Directory receiving the CSV and manifest
        parallel: Worker threads
    """

    p_u_dbm: float = 15.0
    p_b_dbm: float = 20.0
    p_f_dbm: float = -5.0
    sigma_f_dbm: float = -80.0
    sigma_0_dbm: float = -80.0
    m: int = 4
    n_total: int = 100
    epsilon: float = 0.4
    k_users: int = 4
    d_m: float = 200.0
    h_m: float = 10.0
    beta_db: float = -30.0
    pirs_position_m: Optional[Tuple[float, float, float]] = None
    user_radius_m: float = 5.0
    num_drops: int = 10
    sweep_variable: str = "n_total"
    sweep_grid: Tuple[float, ...] = (100.0,)
    schemes: Tuple[str, ...] = ("distributed-opt",)
    seed: int = 0
    qcqp_method: QcqpMethod = QcqpMethod.COORDINATE_ASCENT
    num_randomizations: int = 200
    ao_tol: float = 1e-4
    ao_max_outer: int = 50
    output_dir: str = "results"
    parallel: int = 1

    def __post_init__(self) -> None:
        if self.sweep_variable not in SWEEP_VARIABLES:
            raise ConfigError(
                f"sweep_variable must be one of {', '.join(SWEEP_VARIABLES)}, got {self.sweep_variable!r}"
            )
        if not self.sweep_grid:
            raise ConfigError("sweep_grid is empty")
        if list(self.sweep_grid) != sorted(self.sweep_grid):
            raise ConfigError("sweep_grid must be sorted ascending")
        if self.sweep_variable in INTEGER_SWEEPS and any(v != int(v) for v in self.sweep_grid):
            raise ConfigError(f"{self.sweep_variable} grid must hold integers")
        if self.sweep_variable == "epsilon" and not all(0.0 <= v <= 1.0 for v in self.sweep_grid):
            raise ConfigError("epsilon grid must lie in [0, 1]")
        if not self.schemes:
            raise ConfigError("schemes is empty")
        for name in ("k_users", "num_drops", "num_randomizations", "ao_max_outer", "parallel"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.user_radius_m < 0:
            raise ConfigError("user_radius_m must be nonnegative")
        if not self.ao_tol > 0:
            raise ConfigError("ao_tol must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be nonnegative")

    def replace(self, **changes) -> "ScenarioConfig":
        return replace(self, **changes)

    def to_system_params(self, sweep_value: Optional[float] = None, k_users: int = 1) -> SystemParams:
        """
        Library parameters at one grid point, with every user at the area center.

        Args:
            sweep_value: Value of ``sweep_variable``; None keeps the configured value
            k_users: Users to place

        Returns:
            SystemParams in mW and linear gain

        Raises:
            ConfigError: If the resulting parameters are invalid
        """
        values = asdict(self)
        if sweep_value is not None:
            values[self.sweep_variable] = int(sweep_value) if self.sweep_variable in INTEGER_SWEEPS else sweep_value
        geometry = Geometry.standard(
            self.d_m,
            self.h_m,
            user_positions=[(0.0, self.d_m, 0.0)] * k_users,
            pirs_position=self.pirs_position_m,
        )
        try:
            return SystemParams(
                p_u_mw=dbm_to_mw(values["p_u_dbm"]),
                p_b_mw=dbm_to_mw(values["p_b_dbm"]),
                p_f_mw=dbm_to_mw(values["p_f_dbm"]),
                sigma_f_mw=dbm_to_mw(self.sigma_f_dbm),
                sigma_0_mw=dbm_to_mw(self.sigma_0_dbm),
                m=int(values["m"]),
                n_total=int(values["n_total"]),
                epsilon=float(values["epsilon"]),
                k_users=k_users,
                geometry=geometry,
                beta=db_to_linear(self.beta_db),
            )
        except ValueError as exc:
            raise ConfigError(f"invalid scenario at {self.sweep_variable}={sweep_value}: {exc}") from exc

    def as_dict(self) -> Dict[str, Any]:
        """Plain JSON-ready echo of every setting."""
        values = asdict(self)
        values["qcqp_method"] = self.qcqp_method.value
        values["sweep_grid"] = list(self.sweep_grid)
        values["schemes"] = list(self.schemes)
        if self.pirs_position_m is not None:
            values["pirs_position_m"] = list(self.pirs_position_m)
        return values


_PARSERS: Dict[str, Callable[[str], Any]] = {
    "p_u_dbm": float,
    "p_b_dbm": float,
    "p_f_dbm": float,
    "sigma_f_dbm": float,
    "sigma_0_dbm": float,
    "m": int,
    "n_total": int,
    "epsilon": float,
    "k_users": int,
    "d_m": float,
    "h_m": float,
    "beta_db": float,
    "pirs_position_m": _parse_position,
    "user_radius_m": float,
    "num_drops": int,
    "sweep_variable": str,
    "sweep_grid": parse_grid,
    "schemes": _parse_schemes,
    "seed": int,
    "qcqp_method": QcqpMethod,
    "num_randomizations": int,
    "ao_tol": float,
    "ao_max_outer": int,
    "output_dir": str,
    "parallel": int,
}

def parse_config_text(text: str, source: str = "<config>") -> Dict[str, Any]:
    """
    Parse ``key = value`` lines.

    Blank lines and ``#`` comments are skipped; a key may appear once.

    Raises:
        ConfigError: On a malformed line, unknown or repeated key, or bad value
    """
    values: Dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"{source}:{number}: expected 'key = value', got {raw.strip()!r}")
        if key not in _PARSERS:
            raise ConfigError(f"{source}:{number}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{number}: key {key!r} given twice")
        try:
            values[key] = _PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{number}: bad value for {key}: {exc}") from exc
    return values


def load_config(
    subcommand: str,
    path: Optional[Union[str, Path]] = None,
    overrides: Optional[Mapping[str, Any]] = None,
    environ: Mapping[str, str] = os.environ,
) -> ScenarioConfig:
    """
    Build the configuration of one subcommand.

    Precedence, highest first: ``overrides`` (CLI flags), the
    ``AIRS_WSR_OUTPUT_DIR`` environment variable (output directory only), the
    config file, then the subcommand defaults.

    Args:
        subcommand: CLI subcommand name
        path: Optional config file
        overrides: Values set on the command line; None entries are ignored
        environ: Environment to read the output directory from

    Returns:
        Validated ScenarioConfig

    Raises:
        ConfigError: On an unknown subcommand, unreadable file or invalid value
    """
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    defaults = SUBCOMMANDS[subcommand]
    values: Dict[str, Any] = {
        "sweep_variable": defaults.sweep_variable,
        "sweep_grid": parse_grid(defaults.sweep_grid),
        "schemes": defaults.schemes,
        **defaults.overrides,
    }
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        values.update(parse_config_text(text, str(path)))
    if environ.get(OUTPUT_DIR_ENV):
        values["output_dir"] = environ[OUTPUT_DIR_ENV]
    values.update({key: value for key, value in (overrides or {}).items() if value is not None})

    config = ScenarioConfig(**values)
    unknown = [scheme for scheme in config.schemes if scheme not in defaults.allowed_schemes]
    if unknown:
        raise ConfigError(
            f"{subcommand} cannot run {', '.join(unknown)}; choose from {', '.join(defaults.allowed_schemes)}"
        )
    return config
