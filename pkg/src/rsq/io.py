"""Run configuration (JSON, schema-validated) and deterministic report output."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from .errors import ConfigError

__all__ = ["CONFIG_SCHEMA", "load_config", "validate_config", "parse_complex", "dumps", "write_report"]

_COMPLEX = {
    "oneOf": [
        {"type": "number"},
        {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
    ]
}
_COMPLEX_LIST = {"type": "array", "items": _COMPLEX, "minItems": 1}

CONFIG_SCHEMA: dict[str, Any] = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "seed": {"type": "integer", "minimum": 0},
        "threads": {"type": "integer", "minimum": 1},
        "samples": {"type": "integer", "minimum": 1},
        "suites": {"type": "array", "items": {"type": "string"}},
        "fixture": {"enum": ["none", "broken-moment", "negative-control"]},
        "out": {"type": "string"},
        "csv": {"type": "string"},
        "quiver": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "m": {"type": "integer", "minimum": 1},
                "n": {"type": "integer", "minimum": 1},
                "q": _COMPLEX_LIST,
            },
        },
        "point": {
            "type": "object",
            "additionalProperties": False,
            "required": ["x", "sigma"],
            "properties": {"x": _COMPLEX_LIST, "sigma": _COMPLEX_LIST},
        },
        "flow": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "family": {"enum": ["H", "G"]},
                "weights": {
                    "type": "object",
                    "patternProperties": {"^[1-9][0-9]*$": _COMPLEX},
                    "additionalProperties": False,
                },
                "t_start": {"type": "number"},
                "t_end": {"type": "number"},
                "steps": {"type": "integer", "minimum": 1},
                "scaled": {"type": "boolean"},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                k: {"type": "number", "exclusiveMinimum": 0}
                for k in ("moment", "hamiltonians", "poisson", "xi", "duality", "flows", "quantum")
            },
        },
        "symbolic": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "quiver": {"type": "string", "pattern": "^(tadpole|cyclic:[1-9][0-9]*)$"},
                "max_deg": {"type": "integer", "minimum": 1},
            },
        },
        "quantum": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "op": {"enum": ["dtilde21", "htilde21", "macdonald"]},
                "check": {"enum": ["symbol", "quasi-invariance"]},
                "n": {"type": "integer", "minimum": 1},
                "m": {"type": "integer", "minimum": 1},
                "q": _COMPLEX,
                "t": _COMPLEX,
                "alpha": _COMPLEX,
                "beta": _COMPLEX,
            },
        },
    },
}


def validate_config(cfg: Any) -> dict:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"invalid config at {where}: {exc.message}") from exc
    return cfg


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return validate_config(cfg)


def parse_complex(v) -> complex:
    """A number, a [re, im] pair, or a string such as '0.7+0.3j'."""
    if isinstance(v, str):
        try:
            return complex(v.replace(" ", ""))
        except ValueError as exc:
            raise ConfigError(f"not a complex number: {v!r}") from exc
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            raise ConfigError(f"complex pairs need two entries, got {v!r}")
        return complex(float(v[0]), float(v[1]))
    return complex(v)


def _float(v: float) -> str:
    if math.isnan(v):
        return '"nan"'
    if math.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    return format(v, ".17g")


def dumps(obj: Any, indent: int = 2, _level: int = 0) -> str:
    """JSON text with sorted keys, floats at 17 significant digits and complex as [re, im].

    The standard encoder has no hook for float formatting, hence this small writer.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _float(float(obj))
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps([float(obj.real), float(obj.imag)], indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number)) and not isinstance(v, (bool, complex)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_report(report: dict, path: str | Path | None) -> str:
    text = dumps(report) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
