"""Structured prompt assembly."""

from __future__ import annotations

from dataclasses import dataclass, field

SECTION_ORDER = ("Instruction", "Expert Knowledge", "Reasoning Examples", "Question", "Response Format")


@dataclass
class StructuredPrompt:
    """Five-part prompt; empty sections are omitted from the rendering.

    ``titles`` renames a section heading (the decomposition prompt calls its
    knowledge section "SP Domain Knowledge").
    """

    instruction: str
    question: str
    response_format: str
    expert_knowledge: str = ""
    reasoning_examples: str = ""
    titles: dict = field(default_factory=dict)

    def sections(self) -> dict[str, str]:
        return {
            "Instruction": self.instruction,
            "Expert Knowledge": self.expert_knowledge,
            "Reasoning Examples": self.reasoning_examples,
            "Question": self.question,
            "Response Format": self.response_format,
        }

    def render(self) -> str:
        out = []
        for name, body in self.sections().items():
            if body:
                out.append(f"## {self.titles.get(name, name)}\n{body.strip()}")
        return "\n\n".join(out) + "\n"


DECOMPOSE_EXAMPLE = (
    "Request: classify radar frames as target or clutter.\n"
    "1. Load the radar recordings and split them into labelled frames (depends: none)\n"
    "2. Extract spectral features from every frame (depends: 1)\n"
    "3. Train and evaluate a detector on the features (depends: 2)"
)

DECOMPOSE_FORMAT = ("A numbered list, one subtask per item, each ending with a dependency clause such as "
                    "'(depends: none)' or '(depends: 1, 2)'.")

RATING_RUBRIC = (
    "Rate how hard the subtask is for you to solve without external documents.\n"
    "1 = routine and well defined; 2 = partly ambiguous or needs some domain background; "
    "3 = complex, ambiguous, or needs several pieces of specialised knowledge."
)
