"""JSON experiment configuration: schema, validation and conversion.

Lengths in the file are multiples of the wavelength; ``wavelength`` itself
is in meters.  Angles are in degrees.
"""
from __future__ import annotations

import hashlib
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

import jsonschema

from .geometry import (
    Annulus,
    ApertureRegion,
    Direction,
    Disk,
    Module,
    Point,
    ReceiveArray,
    Rectangle,
    Segment,
)

SWEEP_NAMES = ("r_min", "gap_offset", "hole_fraction", "phi")

_pair = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}

_primitive = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["rectangle", "disk", "annulus", "segment", "point"]},
        "hole": {"type": "boolean"},
        "center": _pair,
        "size": _pair,
        "x": _pair,
        "z": _pair,
        "radius": {"type": "number", "minimum": 0},
        "inner": {"type": "number", "minimum": 0},
        "outer": {"type": "number", "minimum": 0},
        "start": _pair,
        "end": _pair,
        "at": _pair,
        "weight": {"type": "number", "exclusiveMinimum": 0},
    },
    "additionalProperties": False,
    "allOf": [
        {"if": {"properties": {"type": {"const": "disk"}}}, "then": {"required": ["radius"]}},
        {"if": {"properties": {"type": {"const": "annulus"}}}, "then": {"required": ["inner", "outer"]}},
        {"if": {"properties": {"type": {"const": "segment"}}}, "then": {"required": ["start", "end"]}},
        {"if": {"properties": {"type": {"const": "point"}}}, "then": {"required": ["at"]}},
        {
            "if": {"properties": {"type": {"const": "rectangle"}}},
            "then": {"anyOf": [{"required": ["size"]}, {"required": ["x", "z"]}]},
        },
    ],
}

_module = {
    "type": "object",
    "required": ["primitives"],
    "properties": {"primitives": {"type": "array", "items": _primitive, "minItems": 1}},
    "additionalProperties": False,
}

SCHEMA = {
    "type": "object",
    "required": ["wavelength", "aperture", "array"],
    "properties": {
        "wavelength": {"type": "number", "exclusiveMinimum": 0},
        "aperture": {
            "type": "object",
            "properties": {
                "modules": {"type": "array", "items": _module, "minItems": 1},
                "primitives": {"type": "array", "items": _primitive, "minItems": 1},
            },
            "additionalProperties": False,
            "oneOf": [{"required": ["modules"]}, {"required": ["primitives"]}],
        },
        "array": {
            "type": "object",
            "required": ["r_min", "r_max"],
            "properties": {
                "phi_deg": {"type": "number"},
                "theta_deg": {"type": "number"},
                "r_min": {"type": "number", "exclusiveMinimum": 0},
                "r_max": {"type": "number", "exclusiveMinimum": 0},
                "sampling": {"enum": ["inverse_r", "uniform_r"]},
            },
            "additionalProperties": False,
        },
        "model": {"enum": ["exact", "fresnel"]},
        "spacing": {"type": "number", "exclusiveMinimum": 0},
        "rx_count": {"type": "integer", "minimum": 2},
        "epsilon": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "spectrum": {
            "type": "object",
            "properties": {
                "dxi": {"type": "number", "exclusiveMinimum": 0},
                "margin": {"type": "number", "minimum": 10},
                "level": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "required": ["name", "values"],
            "properties": {
                "name": {"type": "string"},
                "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "array_length": {"type": "number", "exclusiveMinimum": 0},
                "module_length": {"type": "number", "exclusiveMinimum": 0},
                "half_length": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "outputs": {"type": "string", "minLength": 1},
    },
    "additionalProperties": False,
}


class ConfigError(ValueError):
    """Invalid configuration; ``field`` is the dotted path of the culprit."""

    def __init__(self, field: str, message: str, line: int | None = None):
        self.field = field
        self.line = line
        where = f"line {line}: " if line else ""
        super().__init__(f"{where}{field or '<root>'}: {message}")


@dataclass(frozen=True)
class ExperimentConfig:
    wavelength: float
    region: ApertureRegion
    array: ReceiveArray
    model: str
    spacing: float
    rx_count: int
    epsilon: float
    sweep: dict | None
    outputs: str
    dxi: float
    margin: float
    level: float
    raw: dict
    config_hash: str

    @property
    def direction(self) -> Direction:
        return self.array.direction


def _locate(text: str, path: list) -> int | None:
    """Best-effort line number of the JSON member at ``path``."""
    pos, line = 0, None
    for key in path:
        if isinstance(key, int):
            continue
        m = re.compile(r'"%s"\s*:' % re.escape(str(key))).search(text, pos)
        if not m:
            break
        pos = m.end()
        line = text.count("\n", 0, m.start()) + 1
    return line


def _dotted(path) -> str:
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


def config_hash(raw: dict) -> str:
    body = {k: v for k, v in raw.items() if k != "outputs"}
    blob = json.dumps(body, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _finite(raw, path=()):
    if isinstance(raw, float) and not math.isfinite(raw):
        raise ConfigError(_dotted(list(path)), "value must be finite")
    if isinstance(raw, dict):
        for k, v in raw.items():
            _finite(v, path + (k,))
    elif isinstance(raw, list):
        for i, v in enumerate(raw):
            _finite(v, path + (i,))


def _primitive_from(spec: dict, lam: float):
    kind = spec["type"]
    hole = bool(spec.get("hole", False))
    if kind == "rectangle":
        if "size" in spec:
            w, h = (v * lam for v in spec["size"])
            if w < 0 or h < 0:
                raise ValueError("rectangle size must be non-negative")
            c = [v * lam for v in spec.get("center", [0.0, 0.0])]
            return Rectangle.centered(w, h, c, hole)
        (x0, x1), (z0, z1) = ([v * lam for v in spec["x"]], [v * lam for v in spec["z"]])
        return Rectangle(x0, x1, z0, z1, hole)
    if kind == "disk":
        c = [v * lam for v in spec.get("center", [0.0, 0.0])]
        return Disk(c[0], c[1], spec["radius"] * lam, hole)
    if kind == "annulus":
        c = [v * lam for v in spec.get("center", [0.0, 0.0])]
        return Annulus(c[0], c[1], spec["inner"] * lam, spec["outer"] * lam, hole)
    if kind == "segment":
        (x0, z0), (x1, z1) = ([v * lam for v in spec["start"]], [v * lam for v in spec["end"]])
        return Segment(x0, z0, x1, z1, hole)
    x, z = (v * lam for v in spec["at"])
    return Point(x, z, spec.get("weight", 1.0), hole)


def region_from(aperture: dict, lam: float, text: str = "") -> ApertureRegion:
    modules_raw = aperture["modules"] if "modules" in aperture else [{"primitives": aperture["primitives"]}]
    base = ["aperture", "modules"] if "modules" in aperture else ["aperture"]
    modules = []
    for i, m in enumerate(modules_raw):
        prims = []
        for j, spec in enumerate(m["primitives"]):
            path = base + ([i, "primitives", j] if "modules" in aperture else ["primitives", j])
            try:
                prims.append(_primitive_from(spec, lam))
            except ValueError as exc:
                raise ConfigError(_dotted(path), str(exc), _locate(text, path)) from None
        try:
            modules.append(Module(tuple(prims)))
        except ValueError as exc:
            path = base + ([i] if "modules" in aperture else [])
            raise ConfigError(_dotted(path), str(exc), _locate(text, path)) from None
    return ApertureRegion(tuple(modules))


def parse_config(raw: dict, text: str = "") -> ExperimentConfig:
    """Validate ``raw`` (already JSON-decoded) and build the experiment objects."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = min(errors, key=lambda e: -len(e.absolute_path))
        path = list(err.absolute_path)
        raise ConfigError(_dotted(path), err.message, _locate(text, path))
    _finite(raw)

    lam = float(raw["wavelength"])
    arr = raw["array"]
    if not arr["r_min"] < arr["r_max"]:
        raise ConfigError("array.r_max", "r_max must exceed r_min", _locate(text, ["array", "r_max"]))
    region = region_from(raw["aperture"], lam, text)
    direction = Direction(math.radians(arr.get("phi_deg", 90.0)), math.radians(arr.get("theta_deg", 0.0)))
    rx_count = int(raw.get("rx_count", 256))
    array = ReceiveArray(
        direction, arr["r_min"] * lam, arr["r_max"] * lam, rx_count, arr.get("sampling", "inverse_r")
    )

    sweep = raw.get("sweep")
    if sweep is not None:
        path = ["sweep", "name"]
        if sweep["name"] not in SWEEP_NAMES:
            raise ConfigError(
                "sweep.name", f"unknown sweep parameter {sweep['name']!r}; expected one of {SWEEP_NAMES}", _locate(text, path)
            )
        need = {"gap_offset": "module_length", "hole_fraction": "half_length"}.get(sweep["name"])
        if need and need not in sweep:
            raise ConfigError(f"sweep.{need}", f"required by the {sweep['name']} sweep", _locate(text, ["sweep"]))
        vals = sweep["values"]
        if sweep["name"] == "r_min" and any(v <= 0 for v in vals):
            raise ConfigError("sweep.values", "r_min values must be positive", _locate(text, ["sweep", "values"]))
        if sweep["name"] == "hole_fraction" and any(not 0 <= v < 1 for v in vals):
            raise ConfigError("sweep.values", "hole fractions must lie in [0, 1)", _locate(text, ["sweep", "values"]))
        if sweep["name"] == "gap_offset" and any(v < 0 for v in vals):
            raise ConfigError("sweep.values", "gap offsets must be non-negative", _locate(text, ["sweep", "values"]))

    spec = raw.get("spectrum", {})
    return ExperimentConfig(
        wavelength=lam,
        region=region,
        array=array,
        model=raw.get("model", "exact"),
        spacing=float(raw.get("spacing", 0.5)) * lam,
        rx_count=rx_count,
        epsilon=float(raw.get("epsilon", 0.01)),
        sweep=sweep,
        outputs=raw.get("outputs", "results"),
        dxi=float(spec.get("dxi", 0.05)),
        margin=float(spec.get("margin", 20.0)),
        level=float(spec.get("level", 0.5)),
        raw=raw,
        config_hash=config_hash(raw),
    )


def load_config(path: str | Path) -> ExperimentConfig:
    text = Path(path).read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(raw, dict):
        raise ConfigError("", "top level must be an object", 1)
    return parse_config(raw, text)
