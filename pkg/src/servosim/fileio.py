"""Parameter, trace, bounds, and inventory files.

Parameter sets and inventories are versioned JSON; traces are plain-text CSV
with '#' comment lines and one header row, floats serialized with repr() so
round trips are lossless. Bundled motor presets live next to this module and
can be redirected with the SERVOSIM_PRESET_DIR environment variable.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .actuator import ActuatorParams, Trace
from .errors import ValidationError
from .metrics import InventoryEntry, TorqueInventory
from .sysid import FIT_PARAM_NAMES, ParamBounds

PARAM_SCHEMA_VERSION = 1
BOUNDS_SCHEMA_VERSION = 1
INVENTORY_SCHEMA_VERSION = 1

PRESET_FAMILIES = ("2XL430", "XC330", "XC430", "2XC430", "XM430-W210")
DEFAULT_INVENTORY = "mini_humanoid"

PARAM_FIELDS = FIT_PARAM_NAMES + ("passive_active_ratio", "kp_conversion")

PARAM_UNITS = {
    "damping": "N*m*s/rad",
    "armature": "kg*m^2",
    "friction_loss": "N*m",
    "tau_max": "N*m",
    "qdot_tau_max": "rad/s",
    "qdot_max": "rad/s",
    "tau_at_qdot_max": "N*m",
    "kd_min": "N*m*s/rad",
    "tau_brake": "N*m",
    "passive_active_ratio": "1",
    "kp_conversion": "1",
}

TRACE_COLUMNS = ("t", "setpoint", "q", "qdot")
TRACE_COLUMNS_TAU = TRACE_COLUMNS + ("tau",)


@dataclass(frozen=True)
class ParamFile:
    schema_version: int
    family: Optional[str]
    params: ActuatorParams


def preset_dir() -> Path:
    override = os.environ.get("SERVOSIM_PRESET_DIR")
    if override:
        return Path(override)
    return Path(__file__).parent / "presets"


def _family_filename(family: str) -> str:
    return family.lower().replace("/", "_") + ".json"


def load_preset(family: str) -> ActuatorParams:
    """Bundled parameter set for a motor family (see PRESET_FAMILIES)."""
    if family not in PRESET_FAMILIES:
        raise ValidationError(
            f"unknown motor family {family!r}; known: {', '.join(PRESET_FAMILIES)}"
        )
    return read_params(preset_dir() / _family_filename(family))


def write_params(
    params: ActuatorParams, path, family: Optional[str] = None
) -> None:
    doc = {
        "schema_version": PARAM_SCHEMA_VERSION,
        "family": family,
        "units": PARAM_UNITS,
        "params": {name: getattr(params, name) for name in PARAM_FIELDS},
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _load_json(path) -> dict:
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: expected a JSON object")
    return doc


def read_param_file(path) -> ParamFile:
    doc = _load_json(path)
    version = doc.get("schema_version")
    if version != PARAM_SCHEMA_VERSION:
        raise ValidationError(
            f"{path}: unknown schema_version {version!r}, expected {PARAM_SCHEMA_VERSION}"
        )
    raw = doc.get("params")
    if not isinstance(raw, dict):
        raise ValidationError(f"{path}: missing 'params' object")
    missing = [name for name in PARAM_FIELDS if name not in raw]
    if missing:
        raise ValidationError(f"{path}: missing field '{missing[0]}'")
    try:
        params = ActuatorParams(**{name: float(raw[name]) for name in PARAM_FIELDS})
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ValidationError):
            raise ValidationError(f"{path}: {exc}") from exc
        raise ValidationError(f"{path}: malformed parameter value ({exc})") from exc
    family = doc.get("family")
    return ParamFile(schema_version=version, family=family, params=params)


def read_params(path) -> ActuatorParams:
    return read_param_file(path).params


def write_bounds(bounds: ParamBounds, path) -> None:
    doc = {
        "schema_version": BOUNDS_SCHEMA_VERSION,
        "lower": {n: float(v) for n, v in zip(FIT_PARAM_NAMES, bounds.lower)},
        "upper": {n: float(v) for n, v in zip(FIT_PARAM_NAMES, bounds.upper)},
    }
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_bounds(path) -> ParamBounds:
    doc = _load_json(path)
    if doc.get("schema_version") != BOUNDS_SCHEMA_VERSION:
        raise ValidationError(f"{path}: unknown schema_version for bounds")
    out = {}
    for key in ("lower", "upper"):
        raw = doc.get(key)
        if not isinstance(raw, dict):
            raise ValidationError(f"{path}: missing '{key}' object")
        missing = [name for name in FIT_PARAM_NAMES if name not in raw]
        if missing:
            raise ValidationError(f"{path}: missing field '{missing[0]}' in {key}")
        out[key] = np.array([float(raw[name]) for name in FIT_PARAM_NAMES])
    try:
        return ParamBounds(lower=out["lower"], upper=out["upper"])
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def read_inventory(path) -> TorqueInventory:
    doc = _load_json(path)
    if doc.get("schema_version") != INVENTORY_SCHEMA_VERSION:
        raise ValidationError(f"{path}: unknown schema_version for inventory")
    for key in ("height_m", "mass_kg", "entries"):
        if key not in doc:
            raise ValidationError(f"{path}: missing field '{key}'")
    entries = []
    for i, raw in enumerate(doc["entries"]):
        for key in ("name", "tau_max", "group"):
            if key not in raw:
                raise ValidationError(f"{path}: entry {i} missing field '{key}'")
        entries.append(
            InventoryEntry(
                name=str(raw["name"]),
                tau_max=float(raw["tau_max"]),
                group=str(raw["group"]),
                end_effector=bool(raw.get("end_effector", False)),
            )
        )
    try:
        return TorqueInventory(
            entries=tuple(entries),
            height=float(doc["height_m"]),
            mass=float(doc["mass_kg"]),
            name=str(doc.get("name", "")),
        )
    except ValidationError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def load_default_inventory() -> TorqueInventory:
    return read_inventory(preset_dir() / (DEFAULT_INVENTORY + ".json"))


def write_columns(path, columns, arrays, comments=()) -> None:
    """Write named numeric columns as CSV with '#' comment lines on top."""
    arrays = [np.asarray(a, dtype=np.float64) for a in arrays]
    n = arrays[0].shape[0]
    if any(a.shape != (n,) for a in arrays):
        raise ValidationError("all columns must share one length")
    lines = [f"# {c}" if c else "#" for c in comments]
    lines.append(",".join(columns))
    for i in range(n):
        lines.append(",".join(repr(float(a[i])) for a in arrays))
    Path(path).write_text("\n".join(lines) + "\n")


def write_trace(trace: Trace, path) -> None:
    columns = TRACE_COLUMNS_TAU if trace.tau is not None else TRACE_COLUMNS
    arrays = [trace.t, trace.setpoint, trace.q, trace.qdot]
    if trace.tau is not None:
        arrays.append(trace.tau)
    comments = (f"dt={trace.dt!r}",) + trace.comments
    write_columns(path, columns, arrays, comments)


def read_trace(path) -> Trace:
    """Parse a trace file; content problems report the offending line number."""
    comments = []
    dt = None
    header = None
    rows = []
    header_line = 0
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("dt="):
                    try:
                        dt = float(body[3:])
                    except ValueError as exc:
                        raise ValidationError(
                            f"{path}:{lineno}: malformed dt comment"
                        ) from exc
                else:
                    comments.append(body)
                continue
            if header is None:
                header = tuple(c.strip() for c in line.split(","))
                header_line = lineno
                if header not in (TRACE_COLUMNS, TRACE_COLUMNS_TAU):
                    raise ValidationError(
                        f"{path}:{lineno}: unexpected columns {header}; expected "
                        f"{TRACE_COLUMNS} or {TRACE_COLUMNS_TAU}"
                    )
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise ValidationError(
                    f"{path}:{lineno}: expected {len(header)} columns, got {len(parts)}"
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: malformed number") from exc
    if header is None:
        raise ValidationError(f"{path}: no header row found")
    if len(rows) < 2:
        raise ValidationError(
            f"{path}: need at least 2 data rows (got {len(rows)})"
        )
    data = np.array(rows)
    t = data[:, 0]
    if dt is None:
        dt = float(t[1] - t[0])
    jitter = np.max(np.abs(np.diff(t) - dt))
    if jitter > 1e-9:
        raise ValidationError(
            f"{path}: t column is not uniform within 1e-9 s "
            f"(dt={dt}, max jitter {jitter:.3e}); first bad row near line "
            f"{header_line + 1 + int(np.argmax(np.abs(np.diff(t) - dt)))}"
        )
    tau = data[:, 4] if len(header) == 5 else None
    return Trace(
        dt=dt,
        t=t,
        setpoint=data[:, 1],
        q=data[:, 2],
        qdot=data[:, 3],
        tau=tau,
        comments=tuple(comments),
    )
