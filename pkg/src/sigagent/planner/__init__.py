"""Stage-one planning pipeline."""

from .memory import AgentMemory
from .pipeline import (
    FINAL_MARKER,
    Planner,
    PlannerConfig,
    parse_decomposition,
    parse_paradigm,
    report_json,
    run_pipeline,
    topological_chain,
)
from .prompts import StructuredPrompt
from .types import (
    Constraint,
    ParadigmKind,
    SolutionParadigm,
    SolutionRecord,
    SpRequest,
    Subtask,
    SubtaskChain,
    Tier,
)

__all__ = [
    "AgentMemory", "FINAL_MARKER", "Planner", "PlannerConfig", "parse_decomposition", "parse_paradigm",
    "report_json", "run_pipeline", "topological_chain", "StructuredPrompt", "Constraint", "ParadigmKind",
    "SolutionParadigm", "SolutionRecord", "SpRequest", "Subtask", "SubtaskChain", "Tier",
]
