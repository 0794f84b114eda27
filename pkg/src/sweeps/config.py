import hashlib
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from models.specs import CavitySpec, DriveForm, DriveProfile, DriveTarget, InitialState, MechanicalSpec
from models.system import SystemConfig, make_system
from utils.errors import ConfigError

SCENARIO_NAMES = (
    "wall_trajectory",
    "photon_number",
    "phonon_number",
    "resonance_scan",
    "force_sweep",
    "critical_length",
    "oracle_compare",
    "interference",
    "conservation",
)
GRID_SCALES = ("linear", "log")

_CAVITY_KEYS = {"length", "num_modes", "field_mass"}
_MECHANICS_KEYS = {"omega", "omega_tilde", "mirror_mass", "epsilon"}
_STATE_KEYS = {
    "k", "kp", "mu_k", "mu_kp", "beta_mag", "theta", "squeeze_r", "squeeze_phi",
    "temperature", "n_thermal",
}
_DRIVE_KEYS = {"target", "form", "g", "Omega", "Omega_tilde", "carrier", "times", "lambda_x", "lambda_p"}
_GRID_KEYS = {"start", "stop", "points", "scale"}
_RUN_KEYS = {"scenario", "seed", "output"}


@dataclass(frozen=True)
class GridSpec:
    """Swept variable: points values from start to stop, linear or log spaced"""

    name: str
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def __post_init__(self):
        field_name = f"grid.{self.name}"
        if isinstance(self.points, bool) or not isinstance(self.points, int) or self.points < 2:
            raise ConfigError(f"grid.points must be ≥ 2, got {self.points!r}", field=field_name)
        if self.scale not in GRID_SCALES:
            raise ConfigError(f"scale must be one of {GRID_SCALES}, got {self.scale!r}", field=field_name)
        if not (math.isfinite(self.start) and math.isfinite(self.stop)):
            raise ConfigError("start and stop must be finite", field=field_name)
        if self.scale == "log" and not (self.start > 0 and self.stop > 0):
            raise ConfigError("log grids need start > 0 and stop > 0", field=field_name)

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.geomspace(self.start, self.stop, self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class RunConfig:
    """
    One run of one scenario: physical system, grids, options and output location

    Parsed from a TOML file; to_toml() writes the canonical form (omega in
    rad/s, mirror_mass in kg, Omega in rad/s), which parses back to an
    equal RunConfig.
    """

    scenario: str
    cavity: CavitySpec
    mechanics: MechanicalSpec
    state: InitialState = InitialState()
    drives: Tuple[DriveProfile, ...] = ()
    grids: Dict[str, GridSpec] = field(default_factory=dict)
    options: Dict[str, Any] = field(default_factory=dict)
    output: str = "results"
    seed: int = 0
    config_hash: str = field(default="", compare=False)

    def system(self) -> SystemConfig:
        return make_system(self.cavity, self.mechanics, self.state, self.drives)

    def grid(self, name: str) -> GridSpec:
        if name not in self.grids:
            raise ConfigError(
                f"grid.points must be ≥ 2: scenario {self.scenario} needs a [grid.{name}] table",
                field=f"grid.{name}",
            )
        return self.grids[name]

    def option(self, name: str, default: Any = None) -> Any:
        return self.options.get(name, default)

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {
            "run": {"scenario": self.scenario, "seed": self.seed, "output": self.output},
            "cavity": asdict(self.cavity),
            "mechanics": {"omega": self.mechanics.omega, "mirror_mass": self.mechanics.mirror_mass},
            "state": {k: v for k, v in asdict(self.state).items() if v is not None},
        }
        if self.drives:
            drives = []
            for drive in self.drives:
                entry = {k: v for k, v in asdict(drive).items() if v is not None and v != ()}
                entry["target"] = drive.target.value
                entry["form"] = drive.form.value
                for name in ("times", "lambda_x", "lambda_p"):
                    if name in entry:
                        entry[name] = list(entry[name])
                drives.append(entry)
            data["drives"] = drives
        if self.grids:
            data["grid"] = {
                name: {"start": g.start, "stop": g.stop, "points": g.points, "scale": g.scale}
                for name, g in self.grids.items()
            }
        if self.options:
            data["options"] = dict(self.options)
        return data

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())


def _table(data: Dict, name: str, allowed: set, required: bool = True) -> Dict:
    section = data.get(name)
    if section is None:
        if required:
            raise ConfigError(f"missing [{name}] table", field=name)
        return {}
    if not isinstance(section, dict):
        raise ConfigError(f"[{name}] must be a table", field=name)
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)}", field=name)
    return section


def _number(section: Dict, key: str, where: str, default: Optional[float] = None) -> Optional[float]:
    value = section.get(key, default)
    if value is None:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"must be a number, got {value!r}", field=f"{where}.{key}")
    return float(value)


def _build(cls, kwargs: Dict, where: str):
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc), field=where)


def _check_choice(entry: Dict, key: str, choices, where: str) -> None:
    """Reject a value outside an enumerated choice"""
    if key not in entry:
        return
    allowed = [choice.value for choice in choices]
    if entry[key] not in allowed:
        raise ConfigError(f"must be one of {allowed}, got {entry[key]!r}", field=f"{where}.{key}")


def parse_config(data: Dict, config_hash: str = "", scenario: Optional[str] = None) -> RunConfig:
    """
    Build a RunConfig from parsed TOML data

    Physical fields are validated by the model classes and raise
    PhysicsValidationError; structural problems raise ConfigError. A
    scenario given by the caller overrides [run].scenario.
    """
    run = _table(data, "run", _RUN_KEYS, required=scenario is None)
    scenario = scenario or run.get("scenario")
    if scenario not in SCENARIO_NAMES:
        raise ConfigError(f"unknown scenario {scenario!r}, expected one of {SCENARIO_NAMES}",
                          field="run.scenario")
    seed = run.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"must be an integer, got {seed!r}", field="run.seed")
    output = str(run.get("output", "results"))

    cavity_data = _table(data, "cavity", _CAVITY_KEYS)
    cavity = _build(CavitySpec, dict(cavity_data), "cavity")

    mech_data = _table(data, "mechanics", _MECHANICS_KEYS)
    if ("omega" in mech_data) == ("omega_tilde" in mech_data):
        raise ConfigError("give exactly one of omega, omega_tilde", field="mechanics.omega")
    if ("mirror_mass" in mech_data) == ("epsilon" in mech_data):
        raise ConfigError("give exactly one of mirror_mass, epsilon", field="mechanics.mirror_mass")
    omega = _number(mech_data, "omega", "mechanics")
    if omega is None:
        omega = _number(mech_data, "omega_tilde", "mechanics") * cavity.fundamental_frequency
    if "epsilon" in mech_data:
        mechanics = MechanicalSpec.from_epsilon(omega, _number(mech_data, "epsilon", "mechanics"), cavity.length)
    else:
        mechanics = MechanicalSpec(omega, _number(mech_data, "mirror_mass", "mechanics"), cavity.length)

    state = _build(InitialState, dict(_table(data, "state", _STATE_KEYS, required=False)), "state")

    drives_data = data.get("drives", [])
    if not isinstance(drives_data, list):
        raise ConfigError("use [[drives]] array tables", field="drives")
    drives = []
    for i, entry in enumerate(drives_data):
        where = f"drives[{i}]"
        if not isinstance(entry, dict):
            raise ConfigError("each [[drives]] entry must be a table", field=where)
        unknown = set(entry) - _DRIVE_KEYS
        if unknown:
            raise ConfigError(f"unknown keys {sorted(unknown)}", field=where)
        entry = dict(entry)
        if "Omega_tilde" in entry:
            if "Omega" in entry:
                raise ConfigError("give exactly one of Omega, Omega_tilde", field=f"{where}.Omega")
            entry["Omega"] = _number(entry, "Omega_tilde", where) * cavity.fundamental_frequency
            del entry["Omega_tilde"]
        _check_choice(entry, "target", DriveTarget, where)
        _check_choice(entry, "form", DriveForm, where)
        drives.append(_build(DriveProfile, entry, where))

    grids = {}
    grid_data = data.get("grid", {})
    if not isinstance(grid_data, dict):
        raise ConfigError("[grid.<variable>] tables expected", field="grid")
    for name in grid_data:
        section = _table(grid_data, name, _GRID_KEYS)
        if "points" not in section:
            raise ConfigError("grid.points must be ≥ 2, got none", field=f"grid.{name}")
        grids[name] = GridSpec(
            name=name,
            start=_number(section, "start", f"grid.{name}", 0.0),
            stop=_number(section, "stop", f"grid.{name}", 0.0),
            points=section["points"],
            scale=section.get("scale", "linear"),
        )

    options = data.get("options", {})
    if not isinstance(options, dict):
        raise ConfigError("[options] must be a table", field="options")

    return RunConfig(
        scenario=scenario, cavity=cavity, mechanics=mechanics, state=state, drives=tuple(drives),
        grids=grids, options=dict(options), output=output, seed=seed, config_hash=config_hash,
    )


def config_digest(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def load_config(path: Union[str, Path], scenario: Optional[str] = None) -> RunConfig:
    """
    Read and validate a TOML run configuration

    Args:
        path: Path to the .toml file

    Returns:
        RunConfig carrying the sha256 of the file bytes

    Example:
        >>> cfg = load_config("configs/resonance_scan.toml")
        >>> cfg.scenario
        'resonance_scan'
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", field="config")
    return loads_config(raw, scenario)


def loads_config(raw: Union[bytes, str], scenario: Optional[str] = None) -> RunConfig:
    if isinstance(raw, str):
        raw = raw.encode("utf-8")
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except (tomllib.TOMLDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"invalid TOML: {exc}", field="config")
    return parse_config(data, config_digest(raw), scenario)
