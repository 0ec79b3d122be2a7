"""Seeded feature-hashing text embedder."""

from __future__ import annotations

import hashlib
import re

import numpy as np

_WORD = re.compile(r"[a-z0-9]+")


def _features(text: str) -> list[str]:
    low = text.lower()
    words = _WORD.findall(low)
    feats = [f"w:{w}" for w in words]
    feats += [f"b:{a}_{b}" for a, b in zip(words, words[1:])]
    if not feats:
        feats = [f"c:{low}"]
    return feats


class HashingEmbedder:
    """Bag of words and word bigrams hashed into signed buckets, L2-normalised."""

    def __init__(self, dim: int = 256, seed: int = 0):
        if dim <= 0:
            raise ValueError("dim must be positive")
        self.dim = dim
        self.seed = seed
        self._key = seed.to_bytes(8, "little", signed=True)

    def _bucket(self, feat: str) -> tuple[int, float]:
        h = hashlib.blake2b(feat.encode("utf-8"), digest_size=8, key=self._key).digest()
        v = int.from_bytes(h, "little")
        return v % self.dim, (1.0 if (v >> 63) & 1 else -1.0)

    def embed(self, text: str) -> np.ndarray:
        if not text:
            raise ValueError("cannot embed empty text")
        vec = np.zeros(self.dim)
        for feat in _features(text):
            i, sign = self._bucket(feat)
            vec[i] += sign
        norm = np.linalg.norm(vec)
        if norm == 0:
            # signed collisions cancelled out; fall back to the raw text bucket
            i, _ = self._bucket("c:" + text)
            vec[i] = 1.0
            norm = 1.0
        return vec / norm
