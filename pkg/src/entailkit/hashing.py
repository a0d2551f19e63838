"""FNV-1a 64-bit hashing, used for feature hashing and string seed keys."""

from __future__ import annotations

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = (1 << 64) - 1


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * _FNV_PRIME) & _MASK64
    return h


def text_key(text: str) -> int:
    """Stable 64-bit key for a string, for seed derivation."""
    return fnv1a64(text.encode("utf-8"))
