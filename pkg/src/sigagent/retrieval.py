"""Exact cosine-similarity vector index over a knowledge base."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyIndex
from .provider.embed import HashingEmbedder

CONTEXT_SEPARATOR = "\n\n"


@dataclass(frozen=True)
class KnowledgeDocument:
    doc_id: str
    text: str
    tags: frozenset = frozenset()
    embedding: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.text:
            raise ValueError(f"document {self.doc_id!r} has empty text")


@dataclass(frozen=True)
class Hit:
    doc: KnowledgeDocument
    score: float

    @property
    def doc_id(self) -> str:
        return self.doc.doc_id


@dataclass
class HopContext:
    """Accumulated multi-hop context: every retrieved document, then every answer."""

    documents: list[KnowledgeDocument] = field(default_factory=list)
    answers: list[str] = field(default_factory=list)

    @property
    def doc_ids(self) -> set[str]:
        return {d.doc_id for d in self.documents}

    def render(self) -> str:
        parts = [f"[{d.doc_id}] {d.text}" for d in self.documents]
        parts += [f"(answer {i}) {a}" for i, a in enumerate(self.answers, 1)]
        return "\n".join(parts)

    def is_empty(self) -> bool:
        return not self.documents and not self.answers


class VectorIndex:
    """Brute-force index. Add documents, ``seal()``, then query.

    Ranking is by descending cosine similarity, ties by ascending doc_id.
    """

    def __init__(self, embedder: HashingEmbedder | None = None):
        self.embedder = embedder or HashingEmbedder()
        self.dimension = self.embedder.dim
        self._docs: dict[str, KnowledgeDocument] = {}
        self._matrix: np.ndarray | None = None
        self._order: list[KnowledgeDocument] = []

    def __len__(self):
        return len(self._docs)

    @property
    def sealed(self) -> bool:
        return self._matrix is not None

    @property
    def documents(self) -> list[KnowledgeDocument]:
        return list(self._order) if self.sealed else sorted(self._docs.values(), key=lambda d: d.doc_id)

    def add(self, doc_id: str, text: str, tags: Iterable[str] = ()) -> KnowledgeDocument:
        if self.sealed:
            raise RuntimeError("index is sealed")
        if doc_id in self._docs:
            raise ValueError(f"duplicate doc_id {doc_id!r}")
        doc = KnowledgeDocument(doc_id, text, frozenset(tags), self.embedder.embed(text))
        self._docs[doc_id] = doc
        return doc

    def seal(self) -> "VectorIndex":
        self._order = sorted(self._docs.values(), key=lambda d: d.doc_id)
        self._matrix = (np.stack([d.embedding for d in self._order]) if self._order
                        else np.zeros((0, self.dimension)))
        return self

    def get(self, doc_id: str) -> KnowledgeDocument:
        return self._docs[doc_id]

    def search(self, text: str, top_k: int, exclude: Sequence[str] = ()) -> list[Hit]:
        if not self.sealed:
            raise RuntimeError("seal the index before querying")
        if top_k < 1:
            raise ValueError("top_k must be >= 1")
        if not self._order:
            raise EmptyIndex("knowledge index is empty")
        scores = self._matrix @ self.embedder.embed(text)
        excluded = set(exclude)
        # _order is doc_id-sorted, so a stable sort on -score breaks ties by doc_id
        ranked = np.argsort(-scores, kind="stable")
        hits = []
        for i in ranked:
            doc = self._order[i]
            if doc.doc_id in excluded:
                continue
            hits.append(Hit(doc, float(scores[i])))
            if len(hits) == top_k:
                break
        return hits

    @classmethod
    def from_jsonl(cls, path, embedder: HashingEmbedder | None = None) -> "VectorIndex":
        """Load line-delimited ``{"doc_id", "text", "tags"}`` records and seal."""
        index = cls(embedder)
        for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                index.add(rec["doc_id"], rec["text"], rec.get("tags", ()))
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{path}:{n}: bad knowledge record ({exc})") from exc
        return index.seal()


def retrieve(query: str, index: VectorIndex, top_k: int = 3) -> list[Hit]:
    return index.search(query, top_k)


def retrieve_with_context(query: str, context: HopContext | str, index: VectorIndex, top_k: int = 3) -> list[Hit]:
    """Query with the accumulated context appended; documents already in the context are skipped."""
    if isinstance(context, str):
        context = HopContext(answers=[context] if context else [])
    if context.is_empty():
        return index.search(query, top_k)
    return index.search(query + CONTEXT_SEPARATOR + context.render(), top_k,
                        exclude=sorted(context.doc_ids))
