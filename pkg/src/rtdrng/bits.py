"""Packed bit sequences and their on-disk format.

File layout: 8-byte magic b"RTDBITS1", 8-byte little-endian unsigned bit
count, then the payload packed 8 bits per byte with the first bit in the
most significant position; the final byte is zero-padded.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"RTDBITS1"
_HEADER = struct.Struct("<8sQ")


class BitFileError(ValueError):
    """Malformed bitstream file."""


class BitStream:
    """Immutable ordered bit sequence with exact length, stored packed."""

    __slots__ = ("_packed", "_length")

    def __init__(self, packed: np.ndarray, length: int):
        packed = np.asarray(packed, dtype=np.uint8)
        if length < 0:
            raise ValueError("length must be nonnegative")
        if packed.size != (length + 7) // 8:
            raise ValueError("packed size inconsistent with bit length")
        if length % 8 and packed.size:
            tail = int(packed[-1]) & ((1 << (8 - length % 8)) - 1)
            if tail:
                raise ValueError("trailing pad bits must be zero")
        self._packed = packed
        self._length = length

    @classmethod
    def from_array(cls, bits) -> "BitStream":
        """Build from a 0/1 array; first element becomes the first bit."""
        arr = np.asarray(bits, dtype=np.uint8)
        if arr.ndim != 1:
            raise ValueError("bits must be one-dimensional")
        if arr.size and arr.max() > 1:
            raise ValueError("bits must be 0 or 1")
        return cls(np.packbits(arr), arr.size)

    @classmethod
    def from_bytes(cls, payload: bytes, length: int) -> "BitStream":
        return cls(np.frombuffer(payload, dtype=np.uint8).copy(), length)

    def to_array(self) -> np.ndarray:
        """Unpack to a uint8 array of 0/1 values."""
        return np.unpackbits(self._packed)[: self._length]

    def to_bytes(self) -> bytes:
        return self._packed.tobytes()

    def __len__(self) -> int:
        return self._length

    def __eq__(self, other) -> bool:
        if not isinstance(other, BitStream):
            return NotImplemented
        return self._length == other._length and np.array_equal(self._packed, other._packed)

    def __repr__(self) -> str:
        return f"BitStream(len={self._length})"

    def ones_fraction(self) -> float:
        if self._length == 0:
            raise ValueError("empty bit stream")
        return int(self.to_array().sum()) / self._length


def concat_streams(streams) -> BitStream:
    """Concatenate bit streams in the given order."""
    arrays = [s.to_array() for s in streams]
    if not arrays:
        return BitStream.from_array(np.empty(0, dtype=np.uint8))
    return BitStream.from_array(np.concatenate(arrays))


def write_bits(path, stream: BitStream) -> None:
    path = Path(path)
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, len(stream)))
        fh.write(stream.to_bytes())


def read_bits(path) -> BitStream:
    path = Path(path)
    data = path.read_bytes()
    if len(data) < _HEADER.size:
        raise BitFileError(f"{path}: truncated header")
    magic, length = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise BitFileError(f"{path}: bad magic {magic!r}")
    payload = data[_HEADER.size :]
    if len(payload) != (length + 7) // 8:
        raise BitFileError(
            f"{path}: payload holds {len(payload)} bytes, expected {(length + 7) // 8}"
        )
    try:
        return BitStream.from_bytes(payload, length)
    except ValueError as exc:
        raise BitFileError(f"{path}: {exc}") from exc


__all__ = ["MAGIC", "BitFileError", "BitStream", "concat_streams", "read_bits", "write_bits"]
