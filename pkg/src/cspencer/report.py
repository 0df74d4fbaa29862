"""JSON result records written by the command-line front end.

A record is a flat envelope (command, status, seed, tolerance, backend, ...)
around free-form ``inputs`` and ``result`` objects.  Records are serialised
with sorted keys and ``repr`` floats, so equal inputs give equal bytes.
Non-finite floats are written as the strings ``"inf"``, ``"-inf"``, ``"nan"``.
"""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .core import PhaseVector, TorusPoint, to_json_array
from .errors import DomainError

SCHEMA_VERSION = 1
STATUSES = ("ok", "inconclusive", "error")
EXIT_CODES = {"ok": 0, "inconclusive": 2, "error": 1}


@dataclass(frozen=True)
class RunConfig:
    command: str
    seed: int = 0
    tolerance: float = 1e-6
    resolution: int = 200
    thread_count: int | None = None
    output_path: str | None = None

    def __post_init__(self):
        if not isinstance(self.seed, int) or self.seed < 0:
            raise DomainError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not self.tolerance > 0:
            raise DomainError(f"tolerance must be positive, got {self.tolerance!r}")
        if self.resolution < 16:
            raise DomainError(f"resolution must be at least 16, got {self.resolution}")
        if self.thread_count is not None and self.thread_count < 1:
            raise DomainError("thread_count must be positive")


def _float(x):
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def jsonable(obj):
    """Convert results (dataclasses, numpy values, torus types) to plain JSON data."""
    if obj is None or isinstance(obj, (bool, str)):
        return obj
    if isinstance(obj, (int, np.integer)) and not isinstance(obj, np.bool_):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return _float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_float(obj.real), _float(obj.imag)]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return to_json_array(obj)
        return jsonable(obj.tolist())
    if isinstance(obj, PhaseVector):
        return {"free_angles": [_float(a) for a in obj.free_angles]}
    if isinstance(obj, TorusPoint):
        return [_float(obj.theta1), _float(obj.theta2)]
    if hasattr(obj, "__array__") and not dataclasses.is_dataclass(obj):
        return jsonable(np.asarray(obj))
    if dataclasses.is_dataclass(obj):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = sorted(obj) if isinstance(obj, (set, frozenset)) else obj
        return [jsonable(v) for v in items]
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def make_record(config: RunConfig, status: str, inputs: dict, result: dict,
                backend: str, wall_time: float | None = None) -> dict:
    if status not in STATUSES:
        raise ValueError(f"unknown status {status!r}")
    return {
        "schema_version": SCHEMA_VERSION,
        "command": config.command,
        "status": status,
        "seed": config.seed,
        "tolerance": _float(config.tolerance),
        "resolution": config.resolution,
        "thread_count": config.thread_count,
        "backend": backend,
        "inputs": jsonable(inputs),
        "result": jsonable(result),
        "wall_time": None if wall_time is None else _float(wall_time),
    }


def dumps_record(record: dict) -> str:
    return json.dumps(record, sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_record(record: dict, path) -> None:
    Path(path).write_text(dumps_record(record), encoding="utf-8")


def schema_text() -> str:
    return resources.files("cspencer").joinpath("schema/result.schema.json").read_text(encoding="utf-8")


def schema() -> dict:
    return json.loads(schema_text())
