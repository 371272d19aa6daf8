"""JSON reading and writing for patterns and reports.

Floats are written with 17 significant digits so every value round-trips
exactly.  Complex numbers become ``[re, im]``; complex matrices become
``{"re": ..., "im": ...}``.
"""

from __future__ import annotations

import json
import math

import numpy as np

from .crossratio import CrossRatioSystem
from .crossratio import from_dict as system_from_dict
from .surface import TriangulationError


class FormatError(ValueError):
    pass


def _float(v: float) -> str:
    if math.isnan(v) or math.isinf(v):
        return json.dumps(str(v))
    return format(v, ".17g")


def to_jsonable(obj):
    """Plain Python containers with numpy and complex values converted."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": to_jsonable(obj.real.tolist()), "im": to_jsonable(obj.imag.tolist())}
        return to_jsonable(obj.tolist())
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    return obj


def _encode(obj, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v, indent, level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent, level + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, float):
        return _float(obj)
    return json.dumps(obj)


def dumps(obj, indent: int = 2) -> str:
    return _encode(to_jsonable(obj), indent, 0)


def pattern_to_dict(X: CrossRatioSystem) -> dict:
    return X.to_dict()


def load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path} is not valid JSON: {exc.msg} at line {exc.lineno}") from exc


def pattern_from_json(data) -> CrossRatioSystem:
    """A pattern object, or any object holding one under ``"pattern"``."""
    if isinstance(data, dict) and "pattern" in data and "triangulation" not in data:
        data = data["pattern"]
    if not isinstance(data, dict):
        raise FormatError("expected a JSON object")
    missing = [k for k in ("triangulation", "theta", "log_mag") if k not in data]
    if missing:
        raise FormatError(f"pattern is missing {', '.join(missing)}")
    try:
        return system_from_dict(data)
    except TriangulationError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed pattern: {exc}") from exc


def load_pattern(path: str) -> CrossRatioSystem:
    return pattern_from_json(load_json(path))


def load_vector(path: str, key: str | None = None) -> np.ndarray:
    """A real vector stored as a bare list or under ``key``."""
    data = load_json(path)
    if isinstance(data, dict):
        if key is None or key not in data:
            raise FormatError(f"{path} has no {key!r} entry")
        data = data[key]
    try:
        return np.asarray(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"{path} does not hold a list of numbers") from exc
