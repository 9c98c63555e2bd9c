"""Seeding, resource caps and small statistics helpers."""
from __future__ import annotations

import math
import os

import numpy as np
from scipy import stats

from .errors import InputError, ResourceError

DEFAULT_MAX_VARS = 26
DEFAULT_TERM_CAP = 1 << 20


def max_vars() -> int:
    """Truth-table variable cap, overridable through GKLAB_MAX_VARS."""
    raw = os.environ.get("GKLAB_MAX_VARS")
    if raw is None:
        return DEFAULT_MAX_VARS
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"GKLAB_MAX_VARS must be an integer, got {raw!r}") from None


def check_vars(n: int, what: str = "truth table", limit: int | None = None) -> None:
    limit = max_vars() if limit is None else limit
    if n > limit:
        raise ResourceError(f"{what} over {n} variables exceeds cap of {limit}")


def rng(seed: int, *key: int) -> np.random.Generator:
    """Philox stream for ``seed`` and an optional work-item key.

    Distinct keys give independent streams, so a sweep can be split over
    workers in any order and still reproduce exactly.
    """
    seed = int(seed)
    if not 0 <= seed < 1 << 64:
        raise InputError(f"seed must be a 64-bit unsigned integer, got {seed}")
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *key: int) -> int:
    """A 64-bit child seed, for APIs that take plain integer seeds."""
    return int(rng(seed, *key).integers(0, 1 << 63)) 


def wilson_interval(k, n, confidence: float = 0.99):
    """Wilson score interval for k successes out of n (vectorised over k)."""
    z = stats.norm.ppf(0.5 + confidence / 2)
    k = np.asarray(k, dtype=float)
    phat = k / n
    denom = 1 + z * z / n
    centre = (phat + z * z / (2 * n)) / denom
    half = z * np.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return np.clip(centre - half, 0.0, 1.0), np.clip(centre + half, 0.0, 1.0)


def reps_for(base: float, eps: float) -> int:
    """Smallest t with base**(-t) <= eps."""
    if not 0 < eps < 1:
        raise InputError(f"error budget must lie in (0,1), got {eps}")
    t = max(0, math.ceil(math.log(1 / eps) / math.log(base)) - 1)
    while base ** (-t) > eps * (1 + 1e-12):
        t += 1
    return t


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    d = 2
    while d * d <= q:
        if q % d == 0:
            return False
        d += 1
    return True


def require_prime(q: int) -> int:
    q = int(q)
    if not is_prime(q):
        raise InputError(f"modulus {q} is not prime")
    if q >= 1 << 31:
        raise InputError(f"modulus {q} too large for word arithmetic")
    return q
