"""Stable hashing used by the deterministic stubs and the campaign harness.

FNV-1a (64-bit) is the pinned hash for everything that must reproduce
bit-for-bit across platforms and languages: stub fill colours, embedding
token buckets, and derived campaign seeds. Content digests of rasters use
SHA-256.
"""
from __future__ import annotations

import hashlib

import numpy as np

FNV64_OFFSET = 0xCBF29CE484222325
FNV64_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a over raw bytes."""
    h = FNV64_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV64_PRIME) & _MASK64
    return h


def fnv1a64_text(*parts: object) -> int:
    """FNV-1a over the UTF-8 of `str(part)` values joined by 0x1F separators.

    The separator byte keeps ("ab", "c") and ("a", "bc") distinct.
    """
    joined = b"\x1f".join(str(p).encode("utf-8") for p in parts)
    return fnv1a64(joined)


def image_digest(array: np.ndarray) -> str:
    """SHA-256 over dtype, shape, and raw pixel bytes (C order)."""
    arr = np.ascontiguousarray(array)
    h = hashlib.sha256()
    h.update(str(arr.dtype).encode("ascii"))
    h.update(str(arr.shape).encode("ascii"))
    h.update(arr.tobytes())
    return h.hexdigest()


def file_digest(path) -> str:
    """SHA-256 of a file's bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()
