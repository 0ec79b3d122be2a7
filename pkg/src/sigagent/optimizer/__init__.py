from .core import (Objective, build_proposal_prompt, elite_size, init_pool, latin_hypercube, parse_vector,
                   propose_de, propose_llm, run_de, run_hybrid, run_sa, score_detection)
from .objectives import get_objective, rastrigin, sphere
from .pool import OptimizationReport, SolutionScorePool
from .space import Dimension, ParamSpace
from .surrogate import SurrogateProposer

__all__ = [
    "Dimension", "ParamSpace", "SolutionScorePool", "OptimizationReport", "Objective",
    "score_detection", "init_pool", "latin_hypercube", "build_proposal_prompt", "parse_vector",
    "propose_llm", "propose_de", "elite_size", "run_hybrid", "run_de", "run_sa",
    "SurrogateProposer", "sphere", "rastrigin", "get_objective",
]
