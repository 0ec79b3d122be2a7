"""Predictive-rank lossless source codec."""

from .container import CodecHeader, CompressedBlob, pack_archive, unpack_archive
from .huffman import PrefixCode, byte_huffman_size
from .rank import (
    PredictorRegistry,
    compression_efficiency,
    decode,
    encode,
    rank_stream,
    tokenize,
)

__all__ = [
    "CodecHeader", "CompressedBlob", "pack_archive", "unpack_archive", "PrefixCode", "byte_huffman_size", "PredictorRegistry",
    "compression_efficiency", "decode", "encode", "rank_stream", "tokenize",
]
