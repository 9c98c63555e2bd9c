"""Canonical ordering of the Hamming ball of radius k.

Points are sorted by weight, then lexicographically with x1 as the most
significant coordinate. Points are bitmasks with x_i at bit i-1, so the
lexicographic key is the bit-reversed mask.
"""
from __future__ import annotations

from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np


def ball_size(n: int, k: int) -> int:
    return sum(comb(n, w) for w in range(min(k, n) + 1))


def _msb_value(mask: int, n: int) -> int:
    return sum(1 << (n - 1 - i) for i in range(n) if mask >> i & 1)


@lru_cache(maxsize=256)
def ball_points(n: int, k: int) -> tuple[int, ...]:
    """Masks of all weight-<=k points of {0,1}^n in canonical order."""
    pts = []
    for w in range(min(k, n) + 1):
        layer = [sum(1 << i for i in c) for c in combinations(range(n), w)]
        layer.sort(key=lambda m: _msb_value(m, n))
        pts.extend(layer)
    return tuple(pts)


def ball_index(mask: int, n: int) -> int:
    """Position of ``mask`` in :func:`ball_points` (any radius >= its weight)."""
    w = bin(mask).count("1")
    idx = ball_size(n, w - 1) if w else 0
    seen = 0
    # colex rank of the MSB-first bit positions
    for i in range(n - 1, -1, -1):
        if mask >> i & 1:
            seen += 1
            idx += comb(n - 1 - i, seen)
    return idx


def ball_index_array(cols: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ball index for a stack of input columns.

    ``cols`` has shape (f, N) with row i holding input i+1. Returns
    (weight, index); the index is only meaningful where weight <= k.
    """
    f = cols.shape[0]
    ctab = np.array([[comb(b, j) for j in range(f + 2)] for b in range(f + 1)], dtype=np.int64)
    seen = np.zeros(cols.shape[1:], dtype=np.int64)
    rank = np.zeros(cols.shape[1:], dtype=np.int64)
    for i in range(f - 1, -1, -1):
        bit = cols[i].astype(np.int64)
        rank += bit * ctab[f - 1 - i, seen + 1]
        seen += bit
    offsets = np.array([ball_size(f, w - 1) if w else 0 for w in range(f + 1)], dtype=np.int64)
    return seen, offsets[seen] + rank
