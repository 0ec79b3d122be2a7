from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any

CONSTRAINT_TAGS = ("data_budget", "compute_budget", "modality")
MODALITIES = ("text", "iq_signal", "imu", "image")


class Tier(enum.IntEnum):
    Simple = 1
    Moderate = 2
    Complex = 3


class ParadigmKind(str, enum.Enum):
    PromptReasoning = "PromptReasoning"
    CodeGeneration = "CodeGeneration"
    CrossModalReasoning = "CrossModalReasoning"
    LlmModeling = "LlmModeling"
    LlmOptimizer = "LlmOptimizer"
    ParameterTransfer = "ParameterTransfer"


# paradigms this build cannot execute: no code sandbox, no pretrained weights
OUT_OF_SCOPE = {ParadigmKind.CodeGeneration, ParadigmKind.ParameterTransfer}


@dataclass(frozen=True)
class Constraint:
    tag: str
    value: Any

    def __post_init__(self):
        if self.tag not in CONSTRAINT_TAGS:
            raise ValueError(f"unknown constraint tag {self.tag!r}")
        if self.tag == "modality" and self.value not in MODALITIES:
            raise ValueError(f"unknown modality {self.value!r}")


@dataclass(frozen=True)
class SpRequest:
    goal: str
    constraints: tuple[Constraint, ...] = ()
    artifacts: tuple[str, ...] = ()

    def __post_init__(self):
        if not self.goal or not self.goal.strip():
            raise ValueError("request goal must be non-empty")
        tags = [c.tag for c in self.constraints]
        if len(set(tags)) != len(tags):
            raise ValueError("constraint tags must be unique")

    @classmethod
    def from_dict(cls, data: dict) -> "SpRequest":
        cons = data.get("constraints", {})
        if isinstance(cons, dict):
            cons = [{"tag": k, "value": v} for k, v in cons.items()]
        return cls(
            goal=data.get("goal", ""),
            constraints=tuple(Constraint(c["tag"], c["value"]) for c in cons),
            artifacts=tuple(data.get("artifacts", ())),
        )

    def to_dict(self) -> dict:
        return {"goal": self.goal, "constraints": {c.tag: c.value for c in self.constraints},
                "artifacts": list(self.artifacts)}

    def describe_constraints(self) -> str:
        if not self.constraints:
            return "none"
        return "; ".join(f"{c.tag}={c.value}" for c in self.constraints)


@dataclass(frozen=True)
class SolutionParadigm:
    kind: ParadigmKind
    strengths: str
    limitations: str
    applicability_tags: frozenset = frozenset()


@dataclass
class SolutionRecord:
    subtask_id: str
    paradigm: ParadigmKind
    plan_text: str
    evidence: list[tuple[str, int]] = field(default_factory=list)  # (doc_id, hop index)
    hops_used: int = 0
    retrieval_calls: int = 0
    flags: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    stop_reason: str = ""
    trace: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "subtask_id": self.subtask_id,
            "paradigm": self.paradigm.value,
            "plan_text": self.plan_text,
            "evidence": [list(e) for e in self.evidence],
            "hops_used": self.hops_used,
            "retrieval_calls": self.retrieval_calls,
            "flags": list(self.flags),
            "notes": list(self.notes),
            "stop_reason": self.stop_reason,
            "trace": self.trace,
        }


@dataclass
class Subtask:
    id: str
    description: str
    depends_on: frozenset = frozenset()
    complexity: Tier | None = None
    solution: SolutionRecord | None = None

    def __post_init__(self):
        if self.id in self.depends_on:
            raise ValueError(f"subtask {self.id} depends on itself")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "description": self.description,
            "depends_on": sorted(self.depends_on, key=_id_key),
            "complexity": self.complexity.name if self.complexity else None,
            "solution": self.solution.to_dict() if self.solution else None,
        }


def _id_key(s: str):
    return (0, int(s), "") if s.isdigit() else (1, 0, s)


@dataclass
class SubtaskChain:
    subtasks: list[Subtask]

    def __post_init__(self):
        ids = [s.id for s in self.subtasks]
        if len(set(ids)) != len(ids):
            raise ValueError("subtask ids must be unique")
        seen: set[str] = set()
        for s in self.subtasks:
            if not s.depends_on <= seen:
                raise ValueError(f"subtask {s.id} appears before its dependencies")
            seen.add(s.id)

    def __iter__(self):
        return iter(self.subtasks)

    def __len__(self):
        return len(self.subtasks)

    def to_dict(self) -> list[dict]:
        return [s.to_dict() for s in self.subtasks]
