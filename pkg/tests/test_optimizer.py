import math

import numpy as np
import pytest

from sigagent.errors import LlmProposalFailed, ObjectiveError, OptimizationAborted, PoolTooSmall
from sigagent.optimizer import (Dimension, Objective, ParamSpace, SolutionScorePool, SurrogateProposer,
                                build_proposal_prompt, init_pool, propose_de, propose_llm, run_de,
                                run_hybrid, run_sa, score_detection, sphere)
from sigagent.provider import FixtureEntry, ScriptedProvider

from shared import de_step_oracle


def mixed_space():
    return ParamSpace([
        Dimension("gain", 0.0, 1.0),
        Dimension("taps", 2, 64, kind="integer"),
        Dimension("rate", 1e-4, 1e-1, scale="log"),
    ])


def box(bounds):
    return ParamSpace([Dimension(f"x{i}", lo, hi) for i, (lo, hi) in enumerate(bounds)])


def filled_pool(space, n, seed=1):
    rng = np.random.default_rng(seed)
    pool = SolutionScorePool(space)
    for _ in range(n):
        theta = space.lower + rng.random(len(space)) * (space.upper - space.lower)
        pool.add(theta, float(rng.normal()), "init")
    return pool


# score

@pytest.mark.parametrize("pd,pfa,expected", [(1, 0, 11.0), (0, 1, 0.0), (0.9, 0.1, 9.9)])
def test_score_detection(pd, pfa, expected):
    assert abs(score_detection(pd, pfa) - expected) < 1e-12


@pytest.mark.parametrize("pd,pfa", [(1.1, 0), (0.5, -0.01)])
def test_score_detection_range(pd, pfa):
    with pytest.raises(ValueError):
        score_detection(pd, pfa)


# space

def test_space_validation():
    with pytest.raises(ValueError):
        Dimension("a", 1.0, 1.0)
    with pytest.raises(ValueError):
        Dimension("a", 0.0, 1.0, scale="log")
    with pytest.raises(ValueError):
        ParamSpace([Dimension("a", 0, 1), Dimension("a", 0, 2)])


def test_unit_mapping():
    sp = mixed_space()
    theta = np.array([0.25, 33.0, 1e-2])
    u = sp.to_unit(theta)
    assert u[2] == pytest.approx(2 / 3)
    assert np.allclose(sp.from_unit(u), theta)
    assert sp.from_unit([0.5, 0.51, 0.0])[1] == 34.0


# pool initialisation

def test_init_pool_in_bounds_and_deterministic():
    sp = mixed_space()
    obj = lambda x: float(x[0])
    a = init_pool(sp, obj, 8, seed=3)
    b = init_pool(sp, obj, 8, seed=3)
    assert len(a) == 8
    assert all(sp.contains(t) for t in a.thetas)
    assert all(np.array_equal(x, y) for x, y in zip(a.thetas, b.thetas))
    assert a.tags == ["init"] * 8


def test_init_pool_stratified():
    sp = box([(-1, 1), (0, 10), (5, 6)])
    pool = init_pool(sp, lambda x: 0.0, 8, seed=11)
    u = np.array([sp.to_unit(t) for t in pool.thetas])
    for j in range(3):
        assert sorted(np.floor(u[:, j] * 8).astype(int)) == list(range(8))


def test_init_pool_soft_failure_penalised():
    sp = box([(0, 1)])

    def obj(x):
        if x[0] < 0.5:
            raise ObjectiveError("diverged")
        return 1.0

    pool = init_pool(sp, obj, 8, seed=0)
    assert len(pool) == 8
    assert sum(math.isinf(s) for s in pool.scores) == 4


# LLM proposals

def scripted(*replies):
    return ScriptedProvider([FixtureEntry(None, r) for r in replies])


def test_propose_llm_parses_reply():
    sp = mixed_space()
    pool = filled_pool(sp, 5)
    theta = propose_llm(pool, sp, scripted("0.5, 12, 0.01"))
    assert theta.tolist() == [0.5, 12.0, 0.01]


def test_propose_llm_clamps_and_rounds():
    sp = mixed_space()
    pool = filled_pool(sp, 5)
    theta = propose_llm(pool, sp, scripted("Proposal:\n1.7, 12.6, 0.5"))
    assert theta.tolist() == [1.0, 13.0, 0.1]


def test_propose_llm_garbage_twice():
    sp = mixed_space()
    prov = scripted("no idea", "still no idea", "0.5, 12, 0.01")
    with pytest.raises(LlmProposalFailed):
        propose_llm(filled_pool(sp, 5), sp, prov)
    assert len(prov.calls) == 2


def test_propose_llm_recovers_on_second_attempt():
    sp = mixed_space()
    prov = scripted("hmm", "0.2, 8, 0.001")
    assert propose_llm(filled_pool(sp, 5), sp, prov).tolist() == [0.2, 8.0, 0.001]
    assert "could not be parsed" in prov.calls[1].text()


def test_proposal_prompt_lists_top_ten_and_bounds():
    sp = mixed_space()
    pool = filled_pool(sp, 15)
    text = build_proposal_prompt(pool, sp, "tune a filter")
    listed = [l for l in text.splitlines() if "score=" in l]
    assert len(listed) == 10
    best = max(pool.scores)
    assert listed[0].startswith(f"1. score={best:.6g}")
    assert "- taps: [2, 64] scale=linear kind=integer" in text
    assert "Task: tune a filter" in text
    for word in ("trends", "gaps"):
        assert word in text


# DE step

def test_propose_de_pool_too_small():
    sp = box([(0, 1)] * 2)
    with pytest.raises(PoolTooSmall):
        propose_de(filled_pool(sp, 3), sp, seed=0)


@pytest.mark.parametrize("n,seed", [(8, 0), (8, 5), (12, 1), (40, 2), (40, 9)])
def test_propose_de_matches_oracle(n, seed):
    bounds = [(-3.0, 2.0), (0.0, 100.0), (10.0, 10.5), (-1.0, 1.0)]
    sp = box(bounds)
    pool = filled_pool(sp, n, seed=seed + 100)
    lo, hi = np.array(bounds).T
    got = propose_de(pool, sp, 0.8, 0.9, seed)
    want = de_step_oracle(pool.thetas, pool.scores, lo, hi, 0.8, 0.9, seed)
    assert np.max(np.abs(got - want)) <= 1e-12


def test_propose_de_zero_scale_returns_first_parent():
    sp = box([(0, 1)] * 3)
    pool = filled_pool(sp, 8, seed=4)
    got = propose_de(pool, sp, F=0.0, CR=1.0, seed=7)
    first = np.random.default_rng(7).choice(8, 3, replace=False)[0]
    assert np.allclose(got, pool.thetas[pool.ranked()[first]])


# drivers

def test_hybrid_alternates():
    obj = sphere()
    rep = run_hybrid(obj, provider=SurrogateProposer(0), budget=12, seed=0)
    assert rep.provenance == ["init"] * 8 + ["llm", "de", "llm", "de"]
    assert rep.evaluations == 12
    assert rep.best_score == max(rep.pool.scores)


def test_hybrid_scripted_provider():
    prov = ScriptedProvider([FixtureEntry(None, "0.1, 0.1, 0.1", persistent=True)])
    rep = run_hybrid(sphere(), provider=prov, budget=12, seed=1)
    assert rep.provenance[8:] == ["llm", "de", "llm", "de"]
    assert rep.pool.thetas[8].tolist() == [0.1, 0.1, 0.1]


def test_hybrid_falls_back_to_de():
    prov = ScriptedProvider([FixtureEntry(None, "no numbers here", persistent=True)])
    rep = run_hybrid(sphere(), provider=prov, budget=12, seed=1)
    assert rep.provenance[8:] == ["de"] * 4
    assert len(rep.notes) == 2 and len(prov.calls) == 4


def test_hybrid_deterministic():
    a = run_hybrid(sphere(), provider=SurrogateProposer(3), budget=30, seed=3)
    b = run_hybrid(sphere(), provider=SurrogateProposer(3), budget=30, seed=3)
    assert a.to_dict() == b.to_dict()


def test_hard_failure_aborts_with_partial_report():
    calls = []

    def obj(x):
        calls.append(1)
        if len(calls) == 10:
            raise RuntimeError("device lost")
        return 0.0

    o = Objective("flaky", box([(0, 1)] * 2), obj)
    with pytest.raises(OptimizationAborted) as ei:
        run_hybrid(o, provider=SurrogateProposer(0), budget=20, seed=0)
    assert ei.value.report.evaluations == 9


def test_budget_must_exceed_init():
    with pytest.raises(ValueError):
        run_hybrid(sphere(), provider=SurrogateProposer(0), budget=8)
    with pytest.raises(ValueError):
        run_de(sphere(), budget=8)


@pytest.mark.parametrize("runner", [run_de, run_sa])
def test_baselines_use_exact_budget(runner):
    rep = runner(sphere(), budget=37, seed=2)
    assert rep.evaluations == 37
    assert all(rep.space.contains(t) for t in rep.pool.thetas)


def test_sa_greedy_at_zero_temperature():
    obj = Objective("bumpy", box([(-2, 2)] * 2), lambda x: float(np.sin(5 * x[0]) + np.cos(3 * x[1])))
    rep = run_sa(obj, budget=80, seed=5, T0=0.0)
    cur = rep.current_scores
    assert len(cur) == 80
    assert all(b >= a for a, b in zip(cur, cur[1:]))
    # the walk must have rejected something, otherwise the check above is vacuous
    assert any(s < c for s, c in zip(rep.pool.scores[1:], cur[1:]))


def test_sa_accepts_worse_when_hot():
    obj = Objective("bumpy", box([(-2, 2)] * 2), lambda x: float(np.sin(5 * x[0]) + np.cos(3 * x[1])))
    cur = run_sa(obj, budget=80, seed=5, T0=10.0, cooling=1.0).current_scores
    assert any(b < a for a, b in zip(cur, cur[1:]))


def test_surrogate_finds_quadratic_peak():
    sp = box([(-1, 1)] * 3)
    pool = init_pool(sp, lambda x: -float(np.sum((x - 0.3) ** 2)), 10, seed=0)
    prov = SurrogateProposer(0, jitter=0.0, min_jitter=0.0)
    theta = propose_llm(pool, sp, prov)
    assert np.allclose(theta, 0.3, atol=1e-6)


def test_report_dict_is_json_ready():
    import json
    rep = run_de(sphere(), budget=12, seed=0)
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["evaluations"] == 12 and len(d["trajectory"]) == 12
    assert d["best_score"] == max(e["score"] for e in d["trajectory"])
