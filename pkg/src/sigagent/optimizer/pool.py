from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import numpy as np

from .space import ParamSpace, finite_or_none

PROVENANCE = ("init", "llm", "de", "sa")


class SolutionScorePool:
    """Append-only record of evaluated parameter vectors.

    Appends go through a lock so parallel evaluators still produce a single,
    ordered history; that order is what makes runs reproducible.
    """

    def __init__(self, space: ParamSpace):
        self.space = space
        self.thetas: list[np.ndarray] = []
        self.scores: list[float] = []
        self.tags: list[str] = []
        self._lock = threading.Lock()

    def __len__(self):
        return len(self.scores)

    def add(self, theta, score: float, tag: str) -> None:
        if tag not in PROVENANCE:
            raise ValueError(f"unknown provenance tag {tag!r}")
        theta = np.array(theta, dtype=float)
        if theta.shape != (len(self.space),) or not self.space.contains(theta):
            raise ValueError(f"parameter vector {theta} outside the search space")
        with self._lock:
            self.thetas.append(theta)
            self.scores.append(float(score))
            self.tags.append(tag)

    def ranked(self) -> list[int]:
        """Entry indices by descending score; ties keep insertion order."""
        return sorted(range(len(self.scores)), key=lambda i: -self.scores[i])

    def top(self, n: int) -> list[tuple[np.ndarray, float]]:
        return [(self.thetas[i], self.scores[i]) for i in self.ranked()[:n]]

    def best_index(self) -> int:
        if not self.scores:
            raise ValueError("empty pool")
        return int(np.argmax(self.scores))

    def best_so_far(self) -> list[float]:
        return list(np.maximum.accumulate(self.scores)) if self.scores else []

    def to_list(self) -> list[dict]:
        return [{"theta": t.tolist(), "score": finite_or_none(s), "tag": g}
                for t, s, g in zip(self.thetas, self.scores, self.tags)]


@dataclass
class OptimizationReport:
    method: str
    seed: int
    budget: int
    space: ParamSpace
    pool: SolutionScorePool
    notes: list[str] = field(default_factory=list)
    current_scores: list[float] = field(default_factory=list)

    @property
    def evaluations(self) -> int:
        return len(self.pool)

    @property
    def provenance(self) -> list[str]:
        return list(self.pool.tags)

    @property
    def best_theta(self) -> np.ndarray:
        return self.pool.thetas[self.pool.best_index()]

    @property
    def best_score(self) -> float:
        return self.pool.scores[self.pool.best_index()] if len(self.pool) else -math.inf

    def to_dict(self) -> dict:
        has_best = len(self.pool) > 0
        return {
            "method": self.method,
            "seed": self.seed,
            "budget": self.budget,
            "evaluations": self.evaluations,
            "space": self.space.to_dict(),
            "best_theta": self.best_theta.tolist() if has_best else None,
            "best_score": finite_or_none(self.best_score),
            "trajectory": self.pool.to_list(),
            "notes": list(self.notes),
        }
