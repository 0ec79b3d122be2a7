"""Pool-based parameter search: LLM proposals interleaved with differential evolution."""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from ..errors import LlmProposalFailed, ObjectiveError, OptimizationAborted, PoolTooSmall
from ..planner.prompts import StructuredPrompt
from ..provider.base import ChatRequest
from .pool import OptimizationReport, SolutionScorePool
from .space import ParamSpace

log = logging.getLogger(__name__)

PENALTY = -math.inf
TOP_ENTRIES = 10
_NUMBER = re.compile(r"[-+]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][-+]?\d+)?")


def score_detection(pd: float, pfa: float, alpha: float = 10.0) -> float:
    """Detection score that rewards hits and punishes false alarms ``alpha`` times harder."""
    for name, v in (("pd", pd), ("pfa", pfa)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name}={v} outside [0, 1]")
    return pd + alpha * (1.0 - pfa)


@dataclass
class Objective:
    """Named scalar objective; higher scores are better."""

    name: str
    space: ParamSpace
    fn: Callable[[np.ndarray], float]
    description: str = ""
    thread_safe: bool = True

    def __call__(self, theta) -> float:
        return float(self.fn(np.asarray(theta, dtype=float)))


def _evaluate(objective, theta, pool: SolutionScorePool, tag: str, report: OptimizationReport) -> float:
    try:
        score = float(objective(theta))
    except ObjectiveError as exc:
        log.warning("objective failed at %s: %s; recording penalty", theta, exc)
        score = PENALTY
    except Exception as exc:
        report.notes.append(f"aborted: {type(exc).__name__}: {exc}")
        raise OptimizationAborted(f"objective raised {type(exc).__name__}: {exc}", report) from exc
    if math.isnan(score):
        score = PENALTY
    pool.add(theta, score, tag)
    return score


def latin_hypercube(n: int, d: int, rng: np.random.Generator) -> np.ndarray:
    u = np.empty((n, d))
    for j in range(d):
        u[:, j] = (rng.permutation(n) + rng.random(n)) / n
    return u


def init_pool(space: ParamSpace, objective, n_init: int = 8, seed=0,
              report: OptimizationReport | None = None) -> SolutionScorePool:
    """Evaluate ``n_init`` stratified samples (one per equal-width bin in every dimension)."""
    if n_init < 1:
        raise ValueError("n_init must be positive")
    rng = np.random.default_rng(seed)
    if report is None:
        report = OptimizationReport("init", int(seed) if isinstance(seed, int) else -1, n_init,
                                    space, SolutionScorePool(space))
    for u in latin_hypercube(n_init, len(space), rng):
        _evaluate(objective, space.from_unit(u), report.pool, "init", report)
    return report.pool


# ---- LLM proposals ---------------------------------------------------------------

def build_proposal_prompt(pool: SolutionScorePool, space: ParamSpace, task: str) -> str:
    lines = []
    for rank, (theta, score) in enumerate(pool.top(TOP_ENTRIES), 1):
        vals = ", ".join(space.format_value(j, v) for j, v in enumerate(theta))
        lines.append(f"{rank}. score={score:.6g} | {vals}")
    return StructuredPrompt(
        instruction=(
            "You are tuning the parameters of a signal-processing model to maximise its score. "
            "Study the evaluated configurations below, identify trends that separate good scores from "
            "poor ones, look for gaps in the explored region, and propose one new configuration that "
            "you expect to beat the current best."),
        expert_knowledge=f"Task: {task or 'maximise a black-box score'}\nParameters:\n{space.describe()}",
        question="Best configurations so far (highest score first):\n" + "\n".join(lines),
        response_format=(f"A single line with exactly {len(space)} comma-separated numbers in the order "
                         f"{', '.join(space.names)}. No other text."),
    ).render()


def parse_vector(reply: str, d: int) -> np.ndarray | None:
    """Pull a length-``d`` numeric vector out of a reply, preferring the last matching line."""
    for line in reversed(reply.strip().splitlines()):
        nums = _NUMBER.findall(line)
        if len(nums) == d:
            return np.array([float(x) for x in nums])
    nums = _NUMBER.findall(reply)
    if len(nums) == d:
        return np.array([float(x) for x in nums])
    return None


def propose_llm(pool: SolutionScorePool, space: ParamSpace, provider, task: str = "",
                max_attempts: int = 2, temperature: float = 0.0) -> np.ndarray:
    if not len(pool):
        raise ValueError("LLM proposals need a non-empty pool")
    prompt = build_proposal_prompt(pool, space, task)
    reply = ""
    for attempt in range(max_attempts):
        text = prompt if attempt == 0 else (
            prompt + f"\nYour previous reply could not be parsed:\n{reply.strip()[:200]}\n"
                     f"Reply with exactly {len(space)} comma-separated numbers.\n")
        reply = provider.chat(ChatRequest.simple(text, temperature=temperature, tag="propose"))
        vec = parse_vector(reply, len(space))
        if vec is not None and np.all(np.isfinite(vec)):
            return space.repair(vec)
    raise LlmProposalFailed(f"no usable parameter vector after {max_attempts} attempts")


# ---- differential evolution --------------------------------------------------------

def elite_size(n: int, min_elite: int = 8, fraction: float = 0.25) -> int:
    return min(n, max(min_elite, math.ceil(fraction * n)))


def propose_de(pool: SolutionScorePool, space: ParamSpace, F: float = 0.8, CR: float = 0.9, seed=None,
               min_elite: int = 8, elite_fraction: float = 0.25) -> np.ndarray:
    """One DE/rand/1/bin trial built from the pool's elite.

    Random draws happen in a fixed order: three distinct parents, the
    crossover base, the forced dimension, then the crossover mask.
    ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if len(pool) < 4:
        raise PoolTooSmall(f"DE needs at least 4 pool entries, got {len(pool)}")
    rng = np.random.default_rng(seed)
    order = pool.ranked()
    elite = [space.to_unit(pool.thetas[i]) for i in order[:elite_size(len(pool), min_elite, elite_fraction)]]
    d = len(space)
    i1, i2, i3 = rng.choice(len(elite), 3, replace=False)
    base = elite[int(rng.integers(len(elite)))]
    mutant = elite[i1] + F * (elite[i2] - elite[i3])
    jrand = int(rng.integers(d))
    mask = rng.random(d) < CR
    mask[jrand] = True
    trial = np.clip(np.where(mask, mutant, base), 0.0, 1.0)
    return space.from_unit(trial)


# ---- drivers -----------------------------------------------------------------------

def _check_budget(budget: int, n_init: int):
    if budget <= n_init:
        raise ValueError(f"budget ({budget}) must exceed the initial sample count ({n_init})")


def _space_of(objective, space):
    if space is None:
        space = getattr(objective, "space", None)
    if space is None:
        raise ValueError("no parameter space given")
    return space


def run_hybrid(objective, space: ParamSpace | None = None, provider=None, budget: int = 100, seed: int = 0,
               n_init: int = 8, F: float = 0.8, CR: float = 0.9, task: str | None = None,
               max_attempts: int = 2) -> OptimizationReport:
    """Alternate LLM proposals (odd iterations) with DE steps (even iterations).

    Every objective evaluation, initial samples included, counts against ``budget``.
    A failed LLM proposal is replaced by a DE step so no iteration is lost.
    """
    space = _space_of(objective, space)
    _check_budget(budget, n_init)
    if provider is None:
        raise ValueError("run_hybrid needs a chat provider")
    task = task if task is not None else getattr(objective, "description", "")
    rng = np.random.default_rng(seed)
    report = OptimizationReport("hybrid", seed, budget, space, SolutionScorePool(space))
    init_pool(space, objective, n_init, rng, report)
    for i in range(1, budget - n_init + 1):
        tag = "de"
        if i % 2 == 1:
            try:
                theta = propose_llm(report.pool, space, provider, task, max_attempts)
                tag = "llm"
            except LlmProposalFailed as exc:
                report.notes.append(f"iteration {i}: {exc}; used a DE step")
                theta = propose_de(report.pool, space, F, CR, rng)
        else:
            theta = propose_de(report.pool, space, F, CR, rng)
        _evaluate(objective, theta, report.pool, tag, report)
    return report


def run_de(objective, space: ParamSpace | None = None, budget: int = 100, seed: int = 0,
           population: int = 8, F: float = 0.8, CR: float = 0.9) -> OptimizationReport:
    """Classic generational DE/rand/1/bin with greedy one-to-one replacement."""
    space = _space_of(objective, space)
    _check_budget(budget, population)
    if population < 4:
        raise ValueError("DE population must be at least 4")
    rng = np.random.default_rng(seed)
    report = OptimizationReport("de", seed, budget, space, SolutionScorePool(space))
    init_pool(space, objective, population, rng, report)
    pop = [space.to_unit(t) for t in report.pool.thetas]
    fit = list(report.pool.scores)
    d = len(space)
    while len(report.pool) < budget:
        for i in range(population):
            if len(report.pool) >= budget:
                break
            others = [k for k in range(population) if k != i]
            r1, r2, r3 = rng.choice(others, 3, replace=False)
            mutant = pop[r1] + F * (pop[r2] - pop[r3])
            jrand = int(rng.integers(d))
            mask = rng.random(d) < CR
            mask[jrand] = True
            theta = space.from_unit(np.clip(np.where(mask, mutant, pop[i]), 0.0, 1.0))
            score = _evaluate(objective, theta, report.pool, "de", report)
            if score >= fit[i]:
                pop[i], fit[i] = space.to_unit(theta), score
    return report


def run_sa(objective, space: ParamSpace | None = None, budget: int = 100, seed: int = 0,
           T0: float = 1.0, cooling: float = 0.95, step: float = 0.1) -> OptimizationReport:
    """Simulated annealing with a Gaussian step of ``step`` times each dimension's range.

    The score of the accepted state after every step is kept in
    ``report.current_scores`` so the acceptance rule can be audited.
    """
    space = _space_of(objective, space)
    _check_budget(budget, 1)
    rng = np.random.default_rng(seed)
    report = OptimizationReport("sa", seed, budget, space, SolutionScorePool(space))
    x = rng.random(len(space))
    theta = space.from_unit(x)
    cur = _evaluate(objective, theta, report.pool, "init", report)
    x = space.to_unit(theta)
    T = T0
    current = [cur]
    while len(report.pool) < budget:
        cand = space.from_unit(np.clip(x + rng.normal(0.0, step, len(space)), 0.0, 1.0))
        s = _evaluate(objective, cand, report.pool, "sa", report)
        delta = s - cur
        u = rng.random()
        if delta >= 0 or (T > 0 and math.isfinite(delta) and u < math.exp(delta / T)):
            x, cur = space.to_unit(cand), s
        current.append(cur)
        T *= cooling
    report.current_scores = current
    return report
