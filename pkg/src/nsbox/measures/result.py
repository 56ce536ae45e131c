"""The common return type of every measure and its JSON form."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

import numpy as np

from ..core import Behaviour
from ..localset import BellFunctional, DeterministicPoint
from ..wccpi import LocalWiring


@dataclass(frozen=True)
class MeasureResult:
    measure: str
    value: Any  # Fraction, or float for the relative entropy
    witness: dict = field(default_factory=dict)
    bounds: Optional[tuple] = None

    def to_json(self) -> dict:
        out = {"measure": self.measure, "value": _scalar(self.value)}
        if self.bounds is not None:
            out["bracket"] = [_scalar(v) for v in self.bounds]
        out["witness"] = jsonable(self.witness)
        return out


def _scalar(v) -> str:
    if isinstance(v, float):
        return "inf" if math.isinf(v) else repr(v)
    return str(v)


def jsonable(obj):
    """Convert witnesses to plain JSON values (labels become 1-based)."""
    if isinstance(obj, (Fraction, float)):
        return _scalar(obj)
    if isinstance(obj, (bool, int, str)) or obj is None:
        return obj
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return _scalar(float(obj))
    if isinstance(obj, (Behaviour, BellFunctional, LocalWiring)):
        return obj.to_json()
    if isinstance(obj, DeterministicPoint):
        return {"f": [v + 1 for v in obj.f], "g": [v + 1 for v in obj.g]}
    if isinstance(obj, np.ndarray):
        return [jsonable(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        if all(isinstance(k, str) for k in obj):
            return {k: jsonable(v) for k, v in obj.items()}
        return [{"key": jsonable(k), "weight": jsonable(v)} for k, v in obj.items()]
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "to_json"):
        return obj.to_json()
    raise TypeError(f"cannot serialise {type(obj).__name__}")
