"""
Numeric helpers: edit distance, N50 and key hashing.
"""

from typing import Iterable, Sequence, Union

import numpy as np

_MASK64 = (1 << 64) - 1


def edit_distance(a: str, b: str) -> int:
    """
    Unit-cost Levenshtein distance.

    Args:
        a: First sequence
        b: Second sequence

    Returns:
        Minimum number of insertions, deletions and substitutions turning a into b
    """
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)

    row_b = np.frombuffer(b.encode("ascii"), dtype=np.uint8)
    offsets = np.arange(len(b) + 1, dtype=np.int64)
    prev = offsets.copy()
    for i, ch in enumerate(a.encode("ascii"), start=1):
        substitute = prev[:-1] + (row_b != ch)
        delete = prev[1:] + 1
        cur = np.empty_like(prev)
        cur[0] = i
        cur[1:] = np.minimum(substitute, delete)
        # insertions: cur[j] = min_t<=j cur[t] + (j - t)
        prev = np.minimum.accumulate(cur - offsets) + offsets
    return int(prev[-1])


def n50(lengths: Iterable[int]) -> int:
    """
    Length of the contig holding the middle base of the longest-first concatenation.

    The middle base of a total length T is position ceil(T/2), 1-based.
    """
    ordered = np.sort(np.fromiter(lengths, dtype=np.int64))[::-1]
    if ordered.size == 0:
        return 0
    running = np.cumsum(ordered)
    middle = (int(running[-1]) + 1) // 2
    return int(ordered[np.searchsorted(running, middle, side="left")])


def mix64(value: int) -> int:
    """splitmix64 finalizer; spreads sequential IDs evenly across partitions."""
    z = (value + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def hash_key(key: Union[int, Sequence[int]], seed: int = 0) -> int:
    """Stable 64-bit hash of an integer or a tuple of integers; seed 0 is the unsalted hash."""
    if isinstance(key, tuple):
        h = seed & _MASK64
        for part in key:
            h = mix64(h ^ (hash_key(part) & _MASK64))
        return h
    return mix64((key ^ seed) & _MASK64)
