"""In-place butterflies over the subset lattice of {0,1}^n.

Arrays are indexed by bitmask along the last axis (x_i is bit i-1).
All three transforms run in O(2^n * n).
"""
from __future__ import annotations

import numpy as np


def _nbits(size: int) -> int:
    n = size.bit_length() - 1
    if size != 1 << n:
        raise ValueError(f"length {size} is not a power of two")
    return n


def zeta(a: np.ndarray, q: int | None = None) -> np.ndarray:
    """Subset sums: out[x] = sum of a[s] over s contained in x.

    Read as a multilinear coefficient vector, this is evaluation on every
    boolean point.
    """
    out = np.array(a, copy=True)
    lead = out.shape[:-1]
    n = _nbits(out.shape[-1])
    for i in range(n):
        v = out.reshape(*lead, -1, 2, 1 << i)
        v[..., 1, :] += v[..., 0, :]
        if q is not None:
            v[..., 1, :] %= q
    return out


def mobius(a: np.ndarray, q: int | None = None) -> np.ndarray:
    """Inverse of :func:`zeta`; with q given the result is reduced mod q."""
    out = np.array(a, copy=True)
    lead = out.shape[:-1]
    n = _nbits(out.shape[-1])
    for i in range(n):
        v = out.reshape(*lead, -1, 2, 1 << i)
        v[..., 1, :] -= v[..., 0, :]
        if q is not None:
            v[..., 1, :] %= q
    return out


def walsh_hadamard(a: np.ndarray) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform; applying it twice scales by 2^n."""
    out = np.array(a, dtype=float, copy=True)
    n = _nbits(out.shape[-1])
    for i in range(n):
        v = out.reshape(-1, 2, 1 << i)
        lo = v[:, 0, :].copy()
        v[:, 0, :] += v[:, 1, :]
        v[:, 1, :] = lo - v[:, 1, :]
    return out


def popcounts(n: int) -> np.ndarray:
    """Hamming weight of every index in [0, 2^n)."""
    w = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        w[1 << i: 2 << i] = w[: 1 << i] + 1
    return w


def input_columns(n: int, dtype=np.int64) -> np.ndarray:
    """(n, 2^n) array whose row i holds x_{i+1} at every point."""
    idx = np.arange(1 << n, dtype=np.int64)
    return ((idx[None, :] >> np.arange(n)[:, None]) & 1).astype(dtype)
