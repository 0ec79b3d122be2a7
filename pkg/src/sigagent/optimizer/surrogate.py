"""Deterministic offline stand-in for an LLM that answers parameter-proposal prompts.

It reads the bounds and the ranked pool straight out of the prompt text, fits a
separable quadratic to the listed points in unit coordinates, jumps to the fitted
maximum and adds a small seeded perturbation. Good enough to exercise the hybrid
loop without a network connection.
"""

from __future__ import annotations

import math
import re

import numpy as np

from ..provider.base import ChatRequest

_PARAM = re.compile(r"^- (\S+): \[([^,\]]+), ([^\]]+)\] scale=(\w+) kind=(\w+)\s*$", re.M)
_ENTRY = re.compile(r"^\d+\. score=(\S+) \| (.+)$", re.M)


class SurrogateProposer:
    def __init__(self, seed: int = 0, jitter: float = 0.05, min_jitter: float = 1e-3):
        self.rng = np.random.default_rng(seed)
        self.jitter = jitter
        self.min_jitter = min_jitter
        self.calls = 0

    def chat(self, request: ChatRequest) -> str:
        self.calls += 1
        text = request.text()
        params = _PARAM.findall(text)
        if not params:
            return "I could not find the parameter bounds."
        lo = np.array([float(p[1]) for p in params])
        hi = np.array([float(p[2]) for p in params])
        log = np.array([p[3] == "log" for p in params])
        integer = np.array([p[4] == "integer" for p in params])

        def to_unit(x):
            x = np.asarray(x, dtype=float)
            a = np.where(log, np.log(np.where(log, lo, 1.0)), lo)
            b = np.where(log, np.log(np.where(log, hi, 1.0)), hi)
            t = np.where(log, np.log(np.where(log, np.maximum(x, 1e-300), 1.0)), x)
            return (t - a) / (b - a), a, b

        pts, scores = [], []
        for s, vals in _ENTRY.findall(text):
            score = float(s)
            if not math.isfinite(score):
                continue
            x = [float(v) for v in vals.split(",")]
            if len(x) != len(params):
                continue
            pts.append(to_unit(x)[0])
            scores.append(score)
        d = len(params)
        if not pts:
            u = self.rng.random(d)
        else:
            X = np.array(pts)
            y = np.array(scores)
            u = self._fit_peak(X, y)
            spread = X.max(axis=0) - X.min(axis=0)
            u = u + self.rng.normal(0.0, np.maximum(self.jitter * spread, self.min_jitter))
        u = np.clip(u, 0.0, 1.0)
        _, a, b = to_unit(lo)
        t = a + u * (b - a)
        x = np.where(log, np.exp(t), t)
        out = [str(int(round(v))) if is_int else f"{v:.10g}" for v, is_int in zip(x, integer)]
        return ", ".join(out)

    @staticmethod
    def _fit_peak(X: np.ndarray, y: np.ndarray) -> np.ndarray:
        n, d = X.shape
        best = X[int(np.argmax(y))].copy()
        if n < 2 * d + 1:
            return best
        A = np.hstack([np.ones((n, 1)), X, X ** 2])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        lin, quad = coef[1:d + 1], coef[d + 1:]
        out = best
        concave = quad < -1e-12
        out[concave] = -lin[concave] / (2 * quad[concave])
        return out
