"""Byte-string vocabularies and greedy longest-match tokenisation."""

from __future__ import annotations

import re
from collections import Counter
from typing import Iterable, Sequence

BYTE_TOKENS = [bytes([b]) for b in range(256)]

_PIECE = re.compile(rb" ?[A-Za-z]+| ?[0-9]+|[^A-Za-z0-9 ]|  +")


def build_vocabulary(texts: Iterable[bytes], max_extra: int = 768, min_count: int = 2) -> list[bytes]:
    """256 byte tokens followed by the most frequent multi-byte word pieces.

    Extra tokens are ordered by descending count, then bytewise, so the
    vocabulary is a pure function of the input texts.
    """
    counts: Counter[bytes] = Counter()
    for text in texts:
        counts.update(p for p in _PIECE.findall(text) if len(p) > 1)
    ranked = sorted((p for p, c in counts.items() if c >= min_count), key=lambda p: (-counts[p], p))
    return BYTE_TOKENS + ranked[:max_extra]


def check_vocabulary(vocabulary: Sequence[bytes]) -> None:
    if len(vocabulary) < 256 or any(vocabulary[i] != BYTE_TOKENS[i] for i in range(256)):
        raise ValueError("vocabulary must start with the 256 single-byte tokens")
    if any(not t for t in vocabulary):
        raise ValueError("empty token in vocabulary")
    if len(set(vocabulary)) != len(vocabulary):
        raise ValueError("duplicate token in vocabulary")


class Tokenizer:
    def __init__(self, vocabulary: Sequence[bytes]):
        check_vocabulary(vocabulary)
        self.vocabulary = list(vocabulary)
        self.ids = {tok: i for i, tok in enumerate(self.vocabulary)}
        self.max_len = max(len(t) for t in self.vocabulary)
        self._prefixes = {t[:k] for t in self.vocabulary for k in range(2, len(t) + 1)}

    def encode(self, data: bytes) -> list[int]:
        ids, prefixes = self.ids, self._prefixes
        out = []
        i, n = 0, len(data)
        while i < n:
            best = 1
            j = i + 2
            while j <= n and j - i <= self.max_len:
                piece = data[i:j]
                if piece not in prefixes:
                    break
                if piece in ids:
                    best = j - i
                j += 1
            out.append(ids[data[i:i + best]] if best > 1 else data[i])
            i += best
        return out

    def decode(self, token_ids: Iterable[int]) -> bytes:
        vocab = self.vocabulary
        return b"".join(vocab[t] for t in token_ids)
