"""Static canonical prefix code over integer symbols.

Code lengths come from a Huffman tree over observed frequencies, capped at
``MAX_CODE_LEN`` by repeatedly halving counts. Codes are assigned
canonically (by length, then symbol value) so only the lengths need to be
stored. Bits are packed MSB-first.
"""

from __future__ import annotations

import heapq
from collections import Counter
from typing import Iterable, Mapping, Sequence

import numpy as np

from ..errors import CorruptPayload

MAX_CODE_LEN = 32


def code_lengths(freqs: Mapping[int, int], max_len: int = MAX_CODE_LEN) -> dict[int, int]:
    """Huffman code length per symbol; a lone symbol gets length 1."""
    items = sorted((s, int(f)) for s, f in freqs.items() if f > 0)
    if not items:
        return {}
    if len(items) == 1:
        return {items[0][0]: 1}
    weights = dict(items)
    while True:
        # (weight, tie-break id, symbols in subtree)
        heap = [(w, i, [s]) for i, (s, w) in enumerate(sorted(weights.items()))]
        heapq.heapify(heap)
        depth = dict.fromkeys(weights, 0)
        next_id = len(heap)
        while len(heap) > 1:
            w1, _, s1 = heapq.heappop(heap)
            w2, _, s2 = heapq.heappop(heap)
            for s in s1:
                depth[s] += 1
            for s in s2:
                depth[s] += 1
            heapq.heappush(heap, (w1 + w2, next_id, s1 + s2))
            next_id += 1
        if max(depth.values()) <= max_len:
            return depth
        weights = {s: max(1, w >> 1) for s, w in weights.items()}


def canonical_codes(lengths: Mapping[int, int]) -> dict[int, tuple[int, int]]:
    """symbol -> (code, length) in canonical order."""
    codes = {}
    code = 0
    prev_len = 0
    for sym, ln in sorted(lengths.items(), key=lambda kv: (kv[1], kv[0])):
        code <<= ln - prev_len
        codes[sym] = (code, ln)
        code += 1
        prev_len = ln
    return codes


class PrefixCode:
    def __init__(self, lengths: Mapping[int, int]):
        if any(not 1 <= ln <= MAX_CODE_LEN for ln in lengths.values()):
            raise ValueError("code lengths must lie in [1, 32]")
        self.lengths = dict(sorted(lengths.items()))
        self.codes = canonical_codes(self.lengths)
        kraft = sum(2.0 ** -ln for ln in self.lengths.values())
        if kraft > 1.0 + 1e-12:
            raise ValueError("code lengths violate the Kraft inequality")

    @classmethod
    def from_symbols(cls, symbols: Iterable[int]) -> "PrefixCode":
        return cls(code_lengths(Counter(symbols)))

    def encode(self, symbols: Sequence[int]) -> tuple[bytes, int]:
        """Pack ``symbols``; returns (payload bytes, bit length)."""
        if len(symbols) == 0:
            return b"", 0
        table = self.codes
        try:
            pairs = [table[s] for s in symbols]
        except KeyError as exc:
            raise ValueError(f"symbol {exc.args[0]} has no code") from None
        codes = np.fromiter((c for c, _ in pairs), dtype=np.uint64, count=len(pairs))
        lens = np.fromiter((ln for _, ln in pairs), dtype=np.int64, count=len(pairs))
        total = int(lens.sum())
        starts = np.cumsum(lens) - lens
        within = np.arange(total, dtype=np.int64) - np.repeat(starts, lens)
        shift = (np.repeat(lens, lens) - 1 - within).astype(np.uint64)
        bits = ((np.repeat(codes, lens) >> shift) & np.uint64(1)).astype(np.uint8)
        return np.packbits(bits).tobytes(), total

    def decode(self, payload: bytes, nbits: int, count: int) -> list[int]:
        """Decode exactly ``count`` symbols consuming exactly ``nbits`` bits."""
        if count == 0:
            if nbits:
                raise CorruptPayload("payload bits present for an empty stream")
            return []
        if not self.codes:
            raise CorruptPayload("no code table for a non-empty stream")
        if nbits > 8 * len(payload) or nbits < count:
            raise CorruptPayload("payload length inconsistent with header")
        maxlen = max(self.lengths.values())
        bits = np.unpackbits(np.frombuffer(payload, dtype=np.uint8))[:nbits].astype(np.uint64)
        padded = np.concatenate([bits, np.zeros(maxlen, dtype=np.uint64)])
        # value of the maxlen-bit window starting at every bit position
        windows = np.zeros(nbits, dtype=np.uint64)
        for j in range(maxlen):
            windows = (windows << np.uint64(1)) | padded[j:j + nbits]

        order = sorted(self.codes.items(), key=lambda kv: (kv[1][1], kv[0]))
        syms = np.array([s for s, _ in order], dtype=np.int64)
        clen = np.array([ln for _, (_, ln) in order], dtype=np.int64)
        ccode = np.array([c for _, (c, _) in order], dtype=np.uint64)
        left = ccode << (maxlen - clen).astype(np.uint64)
        idx = np.searchsorted(left, windows, side="right") - 1
        idx = np.clip(idx, 0, len(order) - 1)
        # a window that falls in an unassigned code region is invalid
        valid = (windows >> (maxlen - clen[idx]).astype(np.uint64)) == ccode[idx]
        sym_at = syms[idx].tolist()
        len_at = np.where(valid, clen[idx], 0).tolist()

        out = []
        pos = 0
        for _ in range(count):
            if pos >= nbits:
                raise CorruptPayload("payload ended before all symbols were decoded")
            ln = len_at[pos]
            if ln == 0:
                raise CorruptPayload(f"invalid code at bit {pos}")
            out.append(sym_at[pos])
            pos += ln
        if pos != nbits:
            raise CorruptPayload("payload bit length does not match decoded symbols")
        return out


def byte_huffman_size(data: bytes) -> int:
    """Bytes needed by an order-0 byte Huffman coder: payload plus a 256-entry length table.

    Used as the classical baseline; the table costs one byte per present
    symbol plus a 32-byte presence bitmap.
    """
    if not data:
        return 0
    code = PrefixCode.from_symbols(data)
    freqs = Counter(data)
    payload_bits = sum(code.lengths[s] * f for s, f in freqs.items())
    return (payload_bits + 7) // 8 + 32 + len(code.lengths)
