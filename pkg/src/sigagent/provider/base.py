"""Request types and the protocols every model backend implements."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

ROLES = ("system", "user", "assistant")


@dataclass(frozen=True)
class Attachment:
    data: bytes
    media_type: str = "image/png"


@dataclass(frozen=True)
class Message:
    role: str
    text: str
    attachments: tuple[Attachment, ...] = ()

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown role {self.role!r}")
        if self.attachments and self.role != "user":
            raise ValueError("attachments are only allowed on user messages")


@dataclass(frozen=True)
class ChatRequest:
    messages: tuple[Message, ...]
    temperature: float = 0.0
    max_tokens: int = 1024
    tag: str = ""  # operation label for call ledgers; not sent to the model

    def __post_init__(self):
        if not self.messages:
            raise ValueError("ChatRequest needs at least one message")
        if self.messages[0].role not in ("system", "user"):
            raise ValueError("first message must be system or user")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_tokens <= 0:
            raise ValueError("max_tokens must be positive")

    @classmethod
    def simple(cls, prompt: str, system: str | None = None, **kw) -> "ChatRequest":
        msgs = []
        if system:
            msgs.append(Message("system", system))
        msgs.append(Message("user", prompt))
        return cls(tuple(msgs), **kw)

    def text(self) -> str:
        return "\n".join(m.text for m in self.messages)


@runtime_checkable
class ChatProvider(Protocol):
    def chat(self, request: ChatRequest) -> str: ...


@runtime_checkable
class TokenPredictor(Protocol):
    """Next-token model over a byte-string vocabulary.

    ``vocabulary[i]`` for i < 256 must be ``bytes([i])``. Context ids may
    include ``bos_id``, which is never predicted.
    """

    vocabulary: Sequence[bytes]
    context_window: int
    model_id: str
    bos_id: int

    def distribution(self, context: Sequence[int]) -> np.ndarray: ...

    def ranking(self, context: Sequence[int]) -> np.ndarray: ...


@dataclass(frozen=True)
class RankedVocabulary:
    """Vocabulary ids sorted by descending probability, ties by ascending id."""

    ranks: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.ranks)

    def __getitem__(self, rank: int) -> int:
        return int(self.ranks[rank])

    def rank_of(self, token_id: int) -> int:
        return int(np.flatnonzero(self.ranks == token_id)[0])


def rank_order(probs: np.ndarray) -> np.ndarray:
    """Stable descending sort: equal probabilities keep ascending index order."""
    return np.argsort(-probs, kind="stable").astype(np.int32)


def next_token_ranking(context: Sequence[int], predictor: TokenPredictor) -> RankedVocabulary:
    if len(context) > predictor.context_window:
        raise ValueError("context longer than the predictor's window; truncate to the last K tokens")
    return RankedVocabulary(np.asarray(predictor.ranking(context)))
