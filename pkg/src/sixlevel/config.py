"""Configuration ingestion, canonical serialization and the bundled scenario.

Configs are strict JSON: every key must be known (typos in physics
parameters are errors, not silently ignored), `schema_version` is
mandatory, and densities may be given per cm^3 (converted on ingestion) or
per m^3 (stored verbatim).  Complex Rabi frequencies are written as
[re, im] pairs; plain numbers are accepted on input.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError
from .model import RB87_D1_OMEGA, AtomParams, DriveParams
from .propagation import PulseGeometry

SCHEMA_VERSION = 1

SWEEP_QUANTITIES = ("susceptibilities", "velocities", "phases")

_TOP_KEYS = {"schema_version", "atom", "drive", "geometry", "sweep"}
_ATOM_KEYS = {"gamma", "dipole_12", "dipole_34", "dipole_56",
              "density_per_cm3", "density_per_m3",
              "omega_P", "omega_S", "omega_T"}
_DRIVE_KEYS = {"rabi_P", "rabi_C", "rabi_S", "rabi_B", "rabi_T", "delta"}
_GEOM_KEYS = {"length", "tau_P", "tau_S", "tau_T"}
_SWEEP_KEYS = {"quantity", "axes"}
_AXIS_KEYS = {"path", "min", "max", "count", "scale"}

_RABI_FIELDS = ("rabi_P", "rabi_C", "rabi_S", "rabi_B", "rabi_T")


@dataclass(frozen=True)
class SweepAxis:
    path: str
    lo: float
    hi: float
    count: int
    scale: str  # "linear" | "log"


@dataclass(frozen=True)
class SweepSpec:
    quantity: str
    axes: tuple[SweepAxis, ...]


@dataclass(frozen=True)
class RunConfig:
    atom: AtomParams
    drive: DriveParams
    geometry: PulseGeometry | None = None
    sweep: SweepSpec | None = None


def _require_mapping(obj, where: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be a JSON object")
    return obj


def _check_keys(data: dict, allowed: set[str], where: str) -> None:
    for key in data:
        if key not in allowed:
            raise ConfigError(f"unknown key '{key}' in {where}")


def _number(data: dict, key: str, where: str) -> float:
    if key not in data:
        raise ConfigError(f"missing key '{key}' in {where}")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key '{key}' in {where} must be a number")
    return float(value)


def _complex(data: dict, key: str, where: str) -> complex:
    if key not in data:
        raise ConfigError(f"missing key '{key}' in {where}")
    value = data[key]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    if (isinstance(value, list) and len(value) == 2
            and all(isinstance(v, (int, float)) and not isinstance(v, bool)
                    for v in value)):
        return complex(value[0], value[1])
    raise ConfigError(f"key '{key}' in {where} must be a number or [re, im] pair")


def _parse_atom(data: dict) -> AtomParams:
    data = _require_mapping(data, "section 'atom'")
    _check_keys(data, _ATOM_KEYS, "section 'atom'")
    gamma = data.get("gamma")
    if (not isinstance(gamma, list) or len(gamma) != 6
            or not all(isinstance(g, (int, float)) and not isinstance(g, bool)
                       for g in gamma)):
        raise ConfigError("key 'gamma' in section 'atom' must be a list of 6 numbers")
    has_cm3 = "density_per_cm3" in data
    has_m3 = "density_per_m3" in data
    if has_cm3 == has_m3:
        raise ConfigError(
            "section 'atom' needs exactly one of 'density_per_cm3' or 'density_per_m3'"
        )
    if has_cm3:
        density = _number(data, "density_per_cm3", "section 'atom'") * 1e6
    else:
        density = _number(data, "density_per_m3", "section 'atom'")
    kwargs = dict(gamma=tuple(float(g) for g in gamma), density=density)
    for key in ("dipole_12", "dipole_34", "dipole_56",
                "omega_P", "omega_S", "omega_T"):
        if key in data:
            kwargs[key] = _number(data, key, "section 'atom'")
    try:
        return AtomParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(f"section 'atom': {exc}") from exc


def _parse_drive(data: dict) -> DriveParams:
    data = _require_mapping(data, "section 'drive'")
    _check_keys(data, _DRIVE_KEYS, "section 'drive'")
    delta = data.get("delta")
    if (not isinstance(delta, list) or len(delta) != 5
            or not all(isinstance(d, (int, float)) and not isinstance(d, bool)
                       for d in delta)):
        raise ConfigError("key 'delta' in section 'drive' must be a list of 5 numbers")
    rabi = {f: _complex(data, f, "section 'drive'") for f in _RABI_FIELDS}
    return DriveParams(delta=tuple(float(d) for d in delta), **rabi)


def _parse_geometry(data: dict) -> PulseGeometry:
    data = _require_mapping(data, "section 'geometry'")
    _check_keys(data, _GEOM_KEYS, "section 'geometry'")
    try:
        return PulseGeometry(
            length=_number(data, "length", "section 'geometry'"),
            tau_P=_number(data, "tau_P", "section 'geometry'"),
            tau_S=_number(data, "tau_S", "section 'geometry'"),
            tau_T=_number(data, "tau_T", "section 'geometry'"),
        )
    except ValueError as exc:
        raise ConfigError(f"section 'geometry': {exc}") from exc


def _parse_sweep(data: dict) -> SweepSpec:
    data = _require_mapping(data, "section 'sweep'")
    _check_keys(data, _SWEEP_KEYS, "section 'sweep'")
    quantity = data.get("quantity")
    if quantity not in SWEEP_QUANTITIES:
        raise ConfigError(
            f"key 'quantity' in section 'sweep' must be one of {SWEEP_QUANTITIES}"
        )
    axes_data = data.get("axes")
    if not isinstance(axes_data, list) or not axes_data:
        raise ConfigError("key 'axes' in section 'sweep' must be a non-empty list")
    if len(axes_data) > 3:
        raise ConfigError("at most 3 sweep axes are supported")
    axes = []
    for i, axis in enumerate(axes_data):
        where = f"sweep axis {i}"
        axis = _require_mapping(axis, where)
        _check_keys(axis, _AXIS_KEYS, where)
        path = axis.get("path")
        if not isinstance(path, str):
            raise ConfigError(f"key 'path' in {where} must be a string")
        count = axis.get("count")
        if isinstance(count, bool) or not isinstance(count, int) or count < 2:
            raise ConfigError(f"key 'count' in {where} must be an integer >= 2")
        scale = axis.get("scale", "linear")
        if scale not in ("linear", "log"):
            raise ConfigError(f"key 'scale' in {where} must be 'linear' or 'log'")
        lo = _number(axis, "min", where)
        hi = _number(axis, "max", where)
        if scale == "log" and (lo <= 0 or hi <= 0):
            raise ConfigError(f"log-scaled {where} needs positive bounds")
        axes.append(SweepAxis(path=path, lo=lo, hi=hi, count=count, scale=scale))
    return SweepSpec(quantity=quantity, axes=tuple(axes))


def parse_config(data: dict, source: str = "config") -> RunConfig:
    """Validate a parsed JSON document into a RunConfig (strict keys)."""
    data = _require_mapping(data, source)
    _check_keys(data, _TOP_KEYS, source)
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(
            f"missing or unsupported 'schema_version' (expected {SCHEMA_VERSION})"
        )
    if "atom" not in data or "drive" not in data:
        raise ConfigError("config requires 'atom' and 'drive' sections")
    cfg = RunConfig(
        atom=_parse_atom(data["atom"]),
        drive=_parse_drive(data["drive"]),
        geometry=_parse_geometry(data["geometry"]) if "geometry" in data else None,
        sweep=_parse_sweep(data["sweep"]) if "sweep" in data else None,
    )
    if cfg.sweep is not None:
        for axis in cfg.sweep.axes:
            validate_path(cfg, axis.path)
        if cfg.sweep.quantity == "phases" and cfg.geometry is None:
            raise ConfigError("sweeping 'phases' requires a 'geometry' section")
    return cfg


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return parse_config(data, source=str(path))


def _complex_out(z: complex) -> list[float]:
    return [z.real, z.imag]


def config_to_dict(cfg: RunConfig) -> dict:
    """Canonical JSON form; re-parsing reproduces the values bit-exactly."""
    atom = cfg.atom
    drive = cfg.drive
    out: dict = {
        "schema_version": SCHEMA_VERSION,
        "atom": {
            "gamma": list(atom.gamma),
            "dipole_12": atom.dipole_12,
            "dipole_34": atom.dipole_34,
            "dipole_56": atom.dipole_56,
            "density_per_m3": atom.density,
            "omega_P": atom.omega_P,
            "omega_S": atom.omega_S,
            "omega_T": atom.omega_T,
        },
        "drive": {
            "rabi_P": _complex_out(drive.rabi_P),
            "rabi_C": _complex_out(drive.rabi_C),
            "rabi_S": _complex_out(drive.rabi_S),
            "rabi_B": _complex_out(drive.rabi_B),
            "rabi_T": _complex_out(drive.rabi_T),
            "delta": list(drive.delta),
        },
    }
    if cfg.geometry is not None:
        out["geometry"] = {
            "length": cfg.geometry.length,
            "tau_P": cfg.geometry.tau_P,
            "tau_S": cfg.geometry.tau_S,
            "tau_T": cfg.geometry.tau_T,
        }
    if cfg.sweep is not None:
        out["sweep"] = {
            "quantity": cfg.sweep.quantity,
            "axes": [
                {"path": ax.path, "min": ax.lo, "max": ax.hi,
                 "count": ax.count, "scale": ax.scale}
                for ax in cfg.sweep.axes
            ],
        }
    return out


def dumps_config(cfg: RunConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"


def paper_scenario() -> RunConfig:
    """The bundled ultracold Rb-87 working point (read-only shipped file)."""
    text = resources.files("sixlevel").joinpath("data/paper_params.json").read_text(
        encoding="utf-8"
    )
    return parse_config(json.loads(text), source="paper_params.json")


# ---------------------------------------------------------------------------
# dotted parameter paths (used by sweeps)

def _split_indexed(field: str, prefix: str, n: int) -> int | None:
    """gamma_1 -> 0 etc.; None when the field is not of this form."""
    if not field.startswith(prefix + "_"):
        return None
    suffix = field[len(prefix) + 1:]
    if not suffix.isdigit():
        return None
    idx = int(suffix)
    if not 1 <= idx <= n:
        raise ConfigError(f"index out of range in parameter path '{prefix}_{suffix}'")
    return idx - 1


def validate_path(cfg: RunConfig, path: str) -> None:
    set_parameter(cfg, path, _probe_value(cfg, path))


def _probe_value(cfg: RunConfig, path: str) -> float:
    """Current value at a path (magnitude for complex entries)."""
    section, _, field = path.partition(".")
    if section == "drive":
        if field in _RABI_FIELDS:
            return abs(getattr(cfg.drive, field))
        idx = _split_indexed(field, "delta", 5)
        if idx is not None:
            return cfg.drive.delta[idx]
    elif section == "atom":
        idx = _split_indexed(field, "gamma", 6)
        if idx is not None:
            return cfg.atom.gamma[idx]
        if field in ("density", "dipole_12", "dipole_34", "dipole_56",
                     "omega_P", "omega_S", "omega_T"):
            return getattr(cfg.atom, field)
    elif section == "geometry":
        if cfg.geometry is None:
            raise ConfigError(f"parameter path '{path}' needs a 'geometry' section")
        if field in ("length", "tau_P", "tau_S", "tau_T"):
            return getattr(cfg.geometry, field)
    raise ConfigError(f"unknown parameter path '{path}'")


def set_parameter(cfg: RunConfig, path: str, value: float) -> RunConfig:
    """Return a copy of the config with one dotted path replaced.

    Complex Rabi entries are assigned the plain real value (phase dropped);
    sweeps therefore scan Rabi magnitudes.
    """
    from dataclasses import replace

    section, _, field = path.partition(".")
    if section == "drive":
        if field in _RABI_FIELDS:
            return replace(cfg, drive=replace(cfg.drive, **{field: complex(value)}))
        idx = _split_indexed(field, "delta", 5)
        if idx is not None:
            deltas = list(cfg.drive.delta)
            deltas[idx] = float(value)
            return replace(cfg, drive=replace(cfg.drive, delta=tuple(deltas)))
    elif section == "atom":
        idx = _split_indexed(field, "gamma", 6)
        if idx is not None:
            gammas = list(cfg.atom.gamma)
            gammas[idx] = float(value)
            return replace(cfg, atom=replace(cfg.atom, gamma=tuple(gammas)))
        if field in ("density", "dipole_12", "dipole_34", "dipole_56",
                     "omega_P", "omega_S", "omega_T"):
            return replace(cfg, atom=replace(cfg.atom, **{field: float(value)}))
    elif section == "geometry":
        if cfg.geometry is None:
            raise ConfigError(f"parameter path '{path}' needs a 'geometry' section")
        if field in ("length", "tau_P", "tau_S", "tau_T"):
            return replace(cfg, geometry=replace(cfg.geometry, **{field: float(value)}))
    raise ConfigError(f"unknown parameter path '{path}'")
