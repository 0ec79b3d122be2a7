"""Rank coding: replace each token by its position in the model's ranked vocabulary."""

from __future__ import annotations

import logging
import zlib
from pathlib import Path
from typing import Mapping, Sequence

from ..errors import CorruptPayload, PredictorMissing
from ..provider.base import TokenPredictor, next_token_ranking
from ..provider.ngram import NgramPredictor
from ..provider.vocab import Tokenizer
from .container import CodecHeader, CompressedBlob
from .huffman import PrefixCode

logger = logging.getLogger(__name__)


def _tokenizer(predictor) -> Tokenizer:
    tok = getattr(predictor, "tokenizer", None)
    return tok if tok is not None else Tokenizer(predictor.vocabulary)


def _as_bytes(text) -> bytes:
    return text.encode("utf-8") if isinstance(text, str) else bytes(text)


def tokenize(text, predictor) -> list[bytes]:
    """Greedy longest-match tokens; their concatenation is the input."""
    tok = _tokenizer(predictor)
    return [tok.vocabulary[i] for i in tok.encode(_as_bytes(text))]


def _rank_fns(predictor):
    if hasattr(predictor, "rank_of") and hasattr(predictor, "token_at"):
        return predictor.rank_of, predictor.token_at
    return (lambda ctx, t: next_token_ranking(ctx, predictor).rank_of(t),
            lambda ctx, r: next_token_ranking(ctx, predictor)[r])


def rank_stream(token_ids: Sequence[int], K: int, predictor) -> list[int]:
    """Rank of every token given its K preceding tokens, BOS-padded on the left."""
    if K < 1:
        raise ValueError("context length K must be >= 1")
    rank_of, _ = _rank_fns(predictor)
    padded = [predictor.bos_id] * K + list(token_ids)
    return [rank_of(padded[i:i + K], padded[i + K]) for i in range(len(token_ids))]


def encode(text, K: int, predictor: TokenPredictor) -> CompressedBlob:
    data = _as_bytes(text)
    ids = _tokenizer(predictor).encode(data)
    ranks = rank_stream(ids, K, predictor)
    code = PrefixCode.from_symbols(ranks)
    payload, nbits = code.encode(ranks)
    header = CodecHeader(predictor.model_id, K, len(ids), zlib.crc32(data), code.lengths, nbits)
    return CompressedBlob(header, payload)


class PredictorRegistry:
    """model_id -> predictor lookup, optionally backed by a directory of ``*.slpm`` files."""

    def __init__(self, predictors=(), model_dir=None):
        self._by_id = {p.model_id: p for p in predictors}
        self.model_dir = Path(model_dir) if model_dir else None
        self._scanned = False

    def add(self, predictor) -> None:
        self._by_id[predictor.model_id] = predictor

    def get(self, model_id: str):
        if model_id not in self._by_id and self.model_dir and not self._scanned:
            self._scanned = True
            for path in sorted(self.model_dir.glob("*.slpm")):
                try:
                    self.add(NgramPredictor.load(path))
                except (ValueError, OSError) as exc:
                    logger.warning("skipping unreadable predictor %s: %s", path, exc)
        try:
            return self._by_id[model_id]
        except KeyError:
            raise PredictorMissing(f"no predictor with model_id {model_id}") from None


def _lookup(registry, model_id):
    if isinstance(registry, PredictorRegistry):
        return registry.get(model_id)
    if isinstance(registry, Mapping):
        if model_id not in registry:
            raise PredictorMissing(f"no predictor with model_id {model_id}")
        return registry[model_id]
    if getattr(registry, "model_id", None) == model_id:
        return registry
    raise PredictorMissing(f"no predictor with model_id {model_id}")


def decode(blob, registry) -> bytes:
    """Invert :func:`encode`. Decoding is strictly sequential per blob."""
    if isinstance(blob, (bytes, bytearray, memoryview)):
        blob = CompressedBlob.from_bytes(bytes(blob))
    h = blob.header
    predictor = _lookup(registry, h.model_id)
    ranks = PrefixCode(h.code_lengths).decode(blob.payload, h.payload_bits, h.token_count)
    V = len(predictor.vocabulary)
    if any(r >= V for r in ranks):
        raise CorruptPayload("rank outside vocabulary")
    _, token_at = _rank_fns(predictor)
    K = h.context_len
    padded = [predictor.bos_id] * K
    for i, r in enumerate(ranks):
        padded.append(token_at(padded[i:i + K], r))
    data = _tokenizer(predictor).decode(padded[K:])
    if zlib.crc32(data) != h.checksum:
        raise CorruptPayload("checksum mismatch after decoding")
    return data


def compression_efficiency(original_len: int, compressed_len: int) -> float:
    if compressed_len <= 0:
        raise ValueError("compressed length must be positive")
    return original_len / compressed_len
