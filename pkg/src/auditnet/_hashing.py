"""Deterministic 64-bit hashing primitives.

FNV-1a seeds document ids and the mock embedder's per-token generators;
splitmix64 expands a seed into a reproducible stream of 64-bit values.
Both are fixed-width integer algorithms, so every platform and language
produces identical output.
"""

from __future__ import annotations

from typing import Iterator

_MASK64 = 0xFFFFFFFFFFFFFFFF

FNV_OFFSET_BASIS = 14695981039346656037
FNV_PRIME = 1099511628211


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash of a byte string."""
    h = FNV_OFFSET_BASIS
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & _MASK64
    return h


def splitmix64(seed: int) -> Iterator[int]:
    """Infinite stream of splitmix64 outputs from a 64-bit seed."""
    state = seed & _MASK64
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield z ^ (z >> 31)


def unit_interval(u: int) -> float:
    """Map a 64-bit value onto [-1, 1) using its top 53 bits."""
    return ((u >> 11) * 2.0**-53) * 2.0 - 1.0
