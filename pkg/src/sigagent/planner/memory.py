"""Static catalogue of solution paradigms consulted during refinement."""

from __future__ import annotations

from dataclasses import dataclass, field

from .types import ParadigmKind, SolutionParadigm

_SEED = [
    SolutionParadigm(
        ParadigmKind.PromptReasoning,
        "Needs no training data or tooling; structured prompts with domain knowledge and worked examples "
        "solve well-posed subtasks directly.",
        "Unreliable for long numeric computation; accuracy depends on what the model already knows.",
        frozenset({"text", "few-shot", "zero-shot"}),
    ),
    SolutionParadigm(
        ParadigmKind.CodeGeneration,
        "Delegates exact computation to an external interpreter, suited to compute-heavy classical pipelines.",
        "Requires a sandboxed runtime; generalises poorly when data are scarce or the task is ill-specified.",
        frozenset({"compute", "classical"}),
    ),
    SolutionParadigm(
        ParadigmKind.CrossModalReasoning,
        "Reads plots and feature visualisations together with text, enabling few-shot decisions on signals.",
        "Needs a multimodal model; image rendering choices influence the answer.",
        frozenset({"iq_signal", "imu", "image", "few-shot"}),
    ),
    SolutionParadigm(
        ParadigmKind.LlmModeling,
        "Uses the language model's own next-token statistics as the signal model, e.g. for source coding.",
        "Bound to token sequences; model size sets the cost of every prediction.",
        frozenset({"text", "coding"}),
    ),
    SolutionParadigm(
        ParadigmKind.LlmOptimizer,
        "Proposes hyperparameters from a pool of evaluated configurations, effective under small evaluation budgets.",
        "Replies can be numerically unstable; needs a fallback optimiser and a scalar objective.",
        frozenset({"optimization", "compute_budget"}),
    ),
    SolutionParadigm(
        ParadigmKind.ParameterTransfer,
        "Initialises a new signal model from pretrained transformer weights to generalise from few samples.",
        "Requires pretrained weights and a fine-tuning loop.",
        frozenset({"training", "data_budget"}),
    ),
]


@dataclass
class AgentMemory:
    paradigms: dict[ParadigmKind, SolutionParadigm] = field(
        default_factory=lambda: {p.kind: p for p in _SEED})

    def __post_init__(self):
        if not self.paradigms:
            raise ValueError("agent memory cannot be empty")

    def __iter__(self):
        return iter(self.paradigms[k] for k in ParadigmKind if k in self.paradigms)

    def __contains__(self, kind) -> bool:
        return kind in self.paradigms

    def describe(self) -> str:
        return "\n".join(f"- {p.kind.value}: strengths: {p.strengths} limitations: {p.limitations}" for p in self)
