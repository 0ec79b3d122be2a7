from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Dimension:
    name: str
    lower: float
    upper: float
    scale: str = "linear"  # or "log"
    kind: str = "continuous"  # or "integer"

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"{self.name}: lower must be < upper")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"{self.name}: unknown scale {self.scale!r}")
        if self.kind not in ("continuous", "integer"):
            raise ValueError(f"{self.name}: unknown kind {self.kind!r}")
        if self.scale == "log" and self.lower <= 0:
            raise ValueError(f"{self.name}: log scale needs a positive lower bound")


class ParamSpace:
    """Box of named parameters with a unit-cube view used by the search operators."""

    def __init__(self, dimensions):
        self.dimensions = [d if isinstance(d, Dimension) else Dimension(*d) for d in dimensions]
        names = [d.name for d in self.dimensions]
        if not names:
            raise ValueError("parameter space needs at least one dimension")
        if len(set(names)) != len(names):
            raise ValueError("dimension names must be unique")
        self.lower = np.array([d.lower for d in self.dimensions], dtype=float)
        self.upper = np.array([d.upper for d in self.dimensions], dtype=float)
        self._log = np.array([d.scale == "log" for d in self.dimensions])
        self._int = np.array([d.kind == "integer" for d in self.dimensions])
        self._lo_t = np.where(self._log, np.log(np.where(self._log, self.lower, 1.0)), self.lower)
        self._hi_t = np.where(self._log, np.log(np.where(self._log, self.upper, 1.0)), self.upper)

    def __len__(self):
        return len(self.dimensions)

    @property
    def names(self) -> list[str]:
        return [d.name for d in self.dimensions]

    def to_unit(self, theta) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        t = np.where(self._log, np.log(np.where(self._log, np.maximum(theta, 1e-300), 1.0)), theta)
        return (t - self._lo_t) / (self._hi_t - self._lo_t)

    def from_unit(self, u) -> np.ndarray:
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        t = self._lo_t + u * (self._hi_t - self._lo_t)
        theta = np.where(self._log, np.exp(t), t)
        return self.repair(theta)

    def repair(self, theta) -> np.ndarray:
        """Round integer dimensions and clamp into bounds."""
        theta = np.asarray(theta, dtype=float)
        theta = np.where(self._int, np.round(theta), theta)
        return np.clip(theta, self.lower, self.upper)

    def contains(self, theta) -> bool:
        theta = np.asarray(theta, dtype=float)
        return bool(np.all(theta >= self.lower) and np.all(theta <= self.upper))

    def format_value(self, i: int, value: float) -> str:
        return str(int(value)) if self._int[i] else f"{value:.6g}"

    def to_dict(self) -> list[dict]:
        return [{"name": d.name, "lower": d.lower, "upper": d.upper, "scale": d.scale, "kind": d.kind}
                for d in self.dimensions]

    @classmethod
    def from_dict(cls, data) -> "ParamSpace":
        return cls([Dimension(d["name"], d["lower"], d["upper"], d.get("scale", "linear"),
                              d.get("kind", "continuous")) for d in data])

    def describe(self) -> str:
        return "\n".join(f"- {d.name}: [{d.lower:g}, {d.upper:g}] scale={d.scale} kind={d.kind}"
                         for d in self.dimensions)


def finite_or_none(x: float):
    return x if math.isfinite(x) else None
