"""Binary container for rank-coded text (little-endian).

Layout::

    magic      4s   b"SLRC"
    version    u16
    model_id   32s  raw SHA-256 of the predictor body
    K          u16  context length
    N          u64  token count
    crc32      u32  checksum of the original bytes
    table      varint M, then M x (varint symbol delta, u8 code length)
    nbits      u64  payload bit length
    payload    ceil(nbits / 8) bytes
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from ..errors import CorruptPayload

MAGIC = b"SLRC"
FORMAT_VERSION = 1
_FIXED = struct.Struct("<4sH32sHQI")


def _put_varint(out: bytearray, value: int) -> None:
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return


def _get_varint(data: bytes, off: int) -> tuple[int, int]:
    value = shift = 0
    while True:
        if off >= len(data) or shift > 63:
            raise CorruptPayload("truncated varint in header")
        byte = data[off]
        off += 1
        value |= (byte & 0x7F) << shift
        shift += 7
        if not byte & 0x80:
            return value, off


@dataclass(frozen=True)
class CodecHeader:
    model_id: str
    context_len: int
    token_count: int
    checksum: int
    code_lengths: dict = field(default_factory=dict)  # rank symbol -> code length
    payload_bits: int = 0
    version: int = FORMAT_VERSION

    def __post_init__(self):
        if self.context_len < 1 or self.context_len > 0xFFFF:
            raise ValueError("context length K must be in [1, 65535]")
        if len(bytes.fromhex(self.model_id)) != 32:
            raise ValueError("model_id must be a 32-byte hex digest")

    def to_bytes(self) -> bytes:
        out = bytearray(_FIXED.pack(MAGIC, self.version, bytes.fromhex(self.model_id),
                                    self.context_len, self.token_count, self.checksum))
        _put_varint(out, len(self.code_lengths))
        prev = 0
        for sym, ln in sorted(self.code_lengths.items()):
            _put_varint(out, sym - prev)
            out.append(ln)
            prev = sym
        out += struct.pack("<Q", self.payload_bits)
        return bytes(out)

    @classmethod
    def parse(cls, data: bytes) -> tuple["CodecHeader", int]:
        """Parse a header from the front of ``data``; returns (header, offset of payload)."""
        if len(data) < _FIXED.size:
            raise CorruptPayload("blob shorter than fixed header")
        magic, version, mid, k, n, crc = _FIXED.unpack_from(data, 0)
        if magic != MAGIC:
            raise CorruptPayload("bad magic")
        if version != FORMAT_VERSION:
            raise CorruptPayload(f"unsupported container version {version}")
        if k < 1:
            raise CorruptPayload("context length K must be >= 1")
        off = _FIXED.size
        m, off = _get_varint(data, off)
        if m > len(data):
            raise CorruptPayload("code table larger than blob")
        lengths = {}
        sym = 0
        for _ in range(m):
            delta, off = _get_varint(data, off)
            if off >= len(data):
                raise CorruptPayload("truncated code table")
            sym += delta
            lengths[sym] = data[off]
            off += 1
        if off + 8 > len(data):
            raise CorruptPayload("truncated header")
        (nbits,) = struct.unpack_from("<Q", data, off)
        off += 8
        return cls(mid.hex(), k, n, crc, lengths, nbits, version), off


@dataclass(frozen=True)
class CompressedBlob:
    header: CodecHeader
    payload: bytes

    def to_bytes(self) -> bytes:
        return self.header.to_bytes() + self.payload

    def __len__(self) -> int:
        return len(self.to_bytes())

    @classmethod
    def from_bytes(cls, data: bytes) -> "CompressedBlob":
        header, off = CodecHeader.parse(data)
        payload = bytes(data[off:])
        if len(payload) != (header.payload_bits + 7) // 8:
            raise CorruptPayload("payload size does not match header bit length")
        return cls(header, payload)


ARCHIVE_MAGIC = b"SLRA"
_ARCHIVE_HEAD = struct.Struct("<4sHI")
_BLOCK_LEN = struct.Struct("<I")


def pack_archive(blobs) -> bytes:
    """Concatenate independently decodable blobs: header, then (u32 length, blob) per block."""
    blobs = [b.to_bytes() if isinstance(b, CompressedBlob) else bytes(b) for b in blobs]
    out = bytearray(_ARCHIVE_HEAD.pack(ARCHIVE_MAGIC, FORMAT_VERSION, len(blobs)))
    for b in blobs:
        out += _BLOCK_LEN.pack(len(b)) + b
    return bytes(out)


def unpack_archive(data: bytes) -> list[CompressedBlob]:
    if len(data) < _ARCHIVE_HEAD.size:
        raise CorruptPayload("archive shorter than its header")
    magic, version, count = _ARCHIVE_HEAD.unpack_from(data, 0)
    if magic != ARCHIVE_MAGIC:
        raise CorruptPayload("bad archive magic")
    if version != FORMAT_VERSION:
        raise CorruptPayload(f"unsupported archive version {version}")
    off = _ARCHIVE_HEAD.size
    blobs = []
    for _ in range(count):
        if off + _BLOCK_LEN.size > len(data):
            raise CorruptPayload("truncated archive")
        (n,) = _BLOCK_LEN.unpack_from(data, off)
        off += _BLOCK_LEN.size
        if off + n > len(data):
            raise CorruptPayload("truncated archive block")
        blobs.append(CompressedBlob.from_bytes(data[off:off + n]))
        off += n
    if off != len(data):
        raise CorruptPayload("trailing bytes after last archive block")
    return blobs
