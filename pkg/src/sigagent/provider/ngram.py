"""Back-off additive-smoothing n-gram predictor and its binary container."""

from __future__ import annotations

import hashlib
import struct
from collections import Counter, defaultdict
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .base import rank_order
from .vocab import BYTE_TOKENS, Tokenizer, build_vocabulary, check_vocabulary

MAGIC = b"SLPM"
FORMAT_VERSION = 1
MAX_CONTEXT = 0xFFFF


class NgramPredictor:
    """Order-``n`` predictor: up to ``n - 1`` tokens of context.

    At each level with a seen context the estimate is
    ``(c(h, w) + s*V*p_lower(w)) / (c(h) + s*V)`` starting from the uniform
    distribution, so the unigram level is plain Laplace smoothing and an
    unseen context backs off to the next shorter one unchanged.
    """

    context_window = MAX_CONTEXT

    def __init__(self, vocabulary: Sequence[bytes], order: int, smoothing: float, tables):
        check_vocabulary(vocabulary)
        if order < 1:
            raise ValueError("order must be >= 1")
        if smoothing <= 0:
            raise ValueError("smoothing must be > 0")
        self.vocabulary = list(vocabulary)
        self.order = order
        self.smoothing = float(smoothing)
        self.bos_id = len(self.vocabulary)
        # tables[n][ctx] -> (token ids, counts, total) for contexts of length n
        self._tables: list[dict] = tables
        self._cache: dict[tuple, tuple[list[int], np.ndarray]] = {}
        self._body = self._serialize_body()
        self.model_id = hashlib.sha256(self._body).hexdigest()
        self._tokenizer: Tokenizer | None = None

    @property
    def tokenizer(self) -> Tokenizer:
        if self._tokenizer is None:
            self._tokenizer = Tokenizer(self.vocabulary)
        return self._tokenizer

    # -- prediction ---------------------------------------------------------

    def _effective(self, context: Sequence[int]) -> tuple:
        """Longest suffix of ``context`` observed in training (<= order-1)."""
        best: tuple = ()
        for n in range(1, min(self.order - 1, len(context)) + 1):
            ctx = tuple(context[len(context) - n:])
            if ctx not in self._tables[n]:
                break
            best = ctx
        return best

    def _distribution_for(self, ctx: tuple) -> np.ndarray:
        V = len(self.vocabulary)
        a = self.smoothing * V
        p = np.full(V, 1.0 / V)
        for n in range(len(ctx) + 1):
            toks, cnts, total = self._tables[n][ctx[len(ctx) - n:] if n else ()]
            p *= a
            p[toks] += cnts
            p /= total + a
        return p

    def distribution(self, context: Sequence[int]) -> np.ndarray:
        return self._distribution_for(self._effective(context))

    def _ranked(self, context: Sequence[int]):
        key = self._effective(context)
        hit = self._cache.get(key)
        if hit is None:
            order = rank_order(self._distribution_for(key))
            inverse = np.empty_like(order)
            inverse[order] = np.arange(len(order), dtype=order.dtype)
            if len(self._cache) >= 8192:
                self._cache.clear()
            hit = self._cache[key] = (order.tolist(), inverse)
        return hit

    def ranking(self, context: Sequence[int]) -> np.ndarray:
        return np.asarray(self._ranked(context)[0], dtype=np.int32)

    def rank_of(self, context: Sequence[int], token_id: int) -> int:
        return int(self._ranked(context)[1][token_id])

    def token_at(self, context: Sequence[int], rank: int) -> int:
        return self._ranked(context)[0][rank]

    # -- serialisation ------------------------------------------------------

    def _serialize_body(self) -> bytes:
        parts = [struct.pack("<Hd", self.order, self.smoothing), struct.pack("<I", len(self.vocabulary))]
        for tok in self.vocabulary:
            parts.append(struct.pack("<H", len(tok)) + tok)
        for n in range(self.order):
            rows = []
            for ctx in sorted(self._tables[n]):
                toks, cnts, _ = self._tables[n][ctx]
                rows.extend((*ctx, int(t), int(c)) for t, c in zip(toks, cnts))
            parts.append(struct.pack("<I", len(rows)))
            parts.append(np.asarray(rows, dtype="<u4").reshape(-1, n + 2).tobytes())
        return b"".join(parts)

    def to_bytes(self) -> bytes:
        return MAGIC + struct.pack("<H", FORMAT_VERSION) + self._body

    def save(self, path) -> None:
        Path(path).write_bytes(self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "NgramPredictor":
        if data[:4] != MAGIC:
            raise ValueError("not a predictor container")
        (version,) = struct.unpack_from("<H", data, 4)
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported predictor format version {version}")
        off = 6
        order, smoothing = struct.unpack_from("<Hd", data, off)
        off += 10
        (nvocab,) = struct.unpack_from("<I", data, off)
        off += 4
        vocab = []
        for _ in range(nvocab):
            (ln,) = struct.unpack_from("<H", data, off)
            vocab.append(bytes(data[off + 2: off + 2 + ln]))
            off += 2 + ln
        rows_by_level = []
        for n in range(order):
            (nrows,) = struct.unpack_from("<I", data, off)
            off += 4
            width = n + 2
            arr = np.frombuffer(data, dtype="<u4", count=nrows * width, offset=off).reshape(nrows, width)
            off += nrows * width * 4
            rows_by_level.append(arr)
        return cls(vocab, order, smoothing, _tables_from_rows(rows_by_level))

    @classmethod
    def load(cls, path) -> "NgramPredictor":
        return cls.from_bytes(Path(path).read_bytes())


def _tables_from_rows(rows_by_level) -> list[dict]:
    tables = []
    for n, arr in enumerate(rows_by_level):
        grouped = defaultdict(list)
        for row in arr.tolist():
            grouped[tuple(row[:n])].append((row[n], row[n + 1]))
        tables.append(_freeze(grouped))
    return tables


def _freeze(grouped) -> dict:
    table = {}
    for ctx, pairs in grouped.items():
        pairs.sort()
        toks = np.array([t for t, _ in pairs], dtype=np.int64)
        cnts = np.array([c for _, c in pairs], dtype=np.float64)
        table[ctx] = (toks, cnts, float(cnts.sum()))
    return table


def _as_documents(corpus) -> list[list]:
    corpus = list(corpus)
    if corpus and isinstance(corpus[0], (list, tuple)):
        return [list(doc) for doc in corpus]
    return [corpus]


def train_ngram(corpus, order: int, smoothing: float = 1.0, vocabulary: Sequence[bytes] | None = None) -> NgramPredictor:
    """Count n-grams over a token sequence (or a list of documents).

    Tokens are byte strings. Every document is left-padded with BOS, so the
    first tokens of a document are counted under BOS contexts.
    """
    docs = _as_documents(corpus)
    if not any(docs):
        raise ValueError("corpus is empty")
    if order < 1:
        raise ValueError("order must be >= 1")
    if vocabulary is None:
        extra = sorted({t for doc in docs for t in doc if len(t) > 1})
        vocabulary = BYTE_TOKENS + extra
    ids = {t: i for i, t in enumerate(vocabulary)}
    bos = len(vocabulary)
    counts = [Counter() for _ in range(order)]
    for doc in docs:
        seq = [bos] * (order - 1) + [ids[t] for t in doc]
        for i in range(order - 1, len(seq)):
            w = seq[i]
            for n in range(order):
                counts[n][(tuple(seq[i - n:i]), w)] += 1
    tables = []
    for n in range(order):
        grouped = defaultdict(list)
        for (ctx, w), c in counts[n].items():
            grouped[ctx].append((w, c))
        tables.append(_freeze(grouped))
    return NgramPredictor(vocabulary, order, smoothing, tables)


def train_from_texts(texts: Iterable[bytes], order: int = 2, smoothing: float = 0.1,
                     max_extra: int = 768) -> NgramPredictor:
    """Build a vocabulary from ``texts``, tokenise each text as a document, and train."""
    texts = list(texts)
    vocab = build_vocabulary(texts, max_extra=max_extra)
    tok = Tokenizer(vocab)
    docs = [[vocab[i] for i in tok.encode(t)] for t in texts]
    return train_ngram(docs, order, smoothing, vocabulary=vocab)
