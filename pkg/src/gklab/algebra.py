"""Prime-field scalars and multilinear polynomials over F_q.

Monomials are stored as bitmasks (x_i at bit i-1), so ``x1*x3`` is ``0b101``.
Every polynomial is kept multilinear, which is sound because it is only ever
evaluated on boolean points.
"""
from __future__ import annotations

import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from . import transforms
from ._util import DEFAULT_TERM_CAP, require_prime
from .ball import ball_points, ball_size
from .errors import InputError, ParseError, ResourceError

Monomial = tuple[int, ...]
DENSE_LIMIT = 20  # largest nvars for which subset-transform products are used


@dataclass(frozen=True)
class FieldElem:
    """Residue ``value`` mod prime ``q``. Compares equal to ints congruent to it."""

    value: int
    q: int

    def __post_init__(self):
        object.__setattr__(self, "value", int(self.value) % self.q)

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElem):
            if other.q != self.q:
                raise InputError(f"modulus mismatch: {self.q} vs {other.q}")
            return other.value
        return int(other)

    def __add__(self, o):
        return FieldElem(self.value + self._coerce(o), self.q)

    __radd__ = __add__

    def __sub__(self, o):
        return FieldElem(self.value - self._coerce(o), self.q)

    def __rsub__(self, o):
        return FieldElem(self._coerce(o) - self.value, self.q)

    def __mul__(self, o):
        return FieldElem(self.value * self._coerce(o), self.q)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElem(-self.value, self.q)

    def __pow__(self, e: int):
        return FieldElem(pow(self.value, e, self.q), self.q)

    def inverse(self) -> "FieldElem":
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse")
        return FieldElem(pow(self.value, self.q - 2, self.q), self.q)

    def __int__(self):
        return self.value

    def __index__(self):
        return self.value

    def __eq__(self, o):
        if isinstance(o, FieldElem):
            return self.q == o.q and self.value == o.value
        if isinstance(o, (int, np.integer)):
            return self.value == int(o) % self.q
        return NotImplemented

    def __hash__(self):
        return hash(self.value)

    def __repr__(self):
        return f"{self.value} (mod {self.q})"


def mono_mask(vars_: Iterable[int]) -> int:
    """Bitmask of a monomial given 1-based variable indices."""
    m = 0
    for v in vars_:
        m |= 1 << (int(v) - 1)
    return m


def mask_vars(mask: int) -> Monomial:
    out, i = [], 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return tuple(out)


@dataclass(frozen=True)
class FieldPoly:
    q: int
    nvars: int
    terms: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        require_prime(self.q)
        clean = {}
        limit = 1 << self.nvars
        for m, c in self.terms.items():
            m = int(m)
            if m < 0 or m >= limit:
                raise InputError(f"monomial {mask_vars(m)} uses variables beyond n={self.nvars}")
            c = int(c) % self.q
            if c:
                clean[m] = c
        object.__setattr__(self, "terms", clean)

    # construction
    @classmethod
    def const(cls, q: int, n: int, c: int) -> "FieldPoly":
        return cls(q, n, {0: c})

    @classmethod
    def var(cls, q: int, n: int, i: int) -> "FieldPoly":
        if not 1 <= i <= n:
            raise InputError(f"variable x{i} out of range for n={n}")
        return cls(q, n, {1 << (i - 1): 1})

    @classmethod
    def from_table(cls, q: int, values) -> "FieldPoly":
        """Unique multilinear polynomial with the given values on {0,1}^n."""
        values = np.asarray(values, dtype=np.int64) % q
        n = values.shape[-1].bit_length() - 1
        coef = transforms.mobius(values, q)
        nz = np.flatnonzero(coef)
        return cls(q, n, dict(zip(nz.tolist(), coef[nz].tolist())))

    @classmethod
    def from_monomials(cls, q: int, n: int, items: Mapping[Monomial, int]) -> "FieldPoly":
        return cls(q, n, {mono_mask(v): c for v, c in items.items()})

    # queries
    @property
    def degree(self) -> int:
        """Largest monomial size; -1 for the zero polynomial."""
        return max((bin(m).count("1") for m in self.terms), default=-1)

    def monomials(self) -> dict[Monomial, int]:
        return {mask_vars(m): c for m, c in self.terms.items()}

    def coeff(self, vars_: Iterable[int]) -> FieldElem:
        return FieldElem(self.terms.get(mono_mask(vars_), 0), self.q)

    def is_zero(self) -> bool:
        return not self.terms

    def table(self) -> np.ndarray:
        """Values on all 2^n points, index(x) = sum x_i 2^(i-1)."""
        if self.nvars > DENSE_LIMIT + 4:
            raise ResourceError(f"value table over {self.nvars} variables is too large")
        a = np.zeros(1 << self.nvars, dtype=np.int64)
        for m, c in self.terms.items():
            a[m] = c
        return transforms.zeta(a, self.q)

    def is_proper(self) -> bool:
        """True when every boolean point evaluates into {0,1}."""
        return bool(np.all(self.table() <= 1))

    def __call__(self, x) -> FieldElem:
        return poly_eval(self, x)

    # arithmetic
    def _check(self, o: "FieldPoly"):
        if not isinstance(o, FieldPoly):
            raise InputError("expected a FieldPoly")
        if o.q != self.q:
            raise InputError(f"modulus mismatch: {self.q} vs {o.q}")
        if o.nvars != self.nvars:
            raise InputError(f"variable count mismatch: {self.nvars} vs {o.nvars}")

    def _lift(self, o) -> "FieldPoly":
        if isinstance(o, FieldPoly):
            self._check(o)
            return o
        return FieldPoly.const(self.q, self.nvars, int(o))

    def __add__(self, o):
        o = self._lift(o)
        t = dict(self.terms)
        for m, c in o.terms.items():
            t[m] = t.get(m, 0) + c
        return FieldPoly(self.q, self.nvars, t)

    __radd__ = __add__

    def __neg__(self):
        return FieldPoly(self.q, self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        if isinstance(o, FieldPoly):
            return poly_mul(self, o)
        c = int(o)
        return FieldPoly(self.q, self.nvars, {m: c * v for m, v in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, o):
        if not isinstance(o, FieldPoly):
            return NotImplemented
        return (self.q, self.nvars, self.terms) == (o.q, o.nvars, o.terms)

    def __hash__(self):
        return hash((self.q, self.nvars, tuple(sorted(self.terms.items()))))

    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"FieldPoly({format_poly(self)!r})"


def _sort_key(m: int):
    return (bin(m).count("1"), mask_vars(m))


def format_poly(p: FieldPoly) -> str:
    """Canonical text, e.g. ``F3[n=4]: 2 + x1*x2 + 2*x3``."""
    parts = []
    for m in sorted(p.terms, key=_sort_key):
        c = p.terms[m]
        if m == 0:
            parts.append(str(c))
            continue
        mono = "*".join(f"x{v}" for v in mask_vars(m))
        parts.append(mono if c == 1 else f"{c}*{mono}")
    return f"F{p.q}[n={p.nvars}]: " + (" + ".join(parts) if parts else "0")


_HEAD = re.compile(r"^\s*F(\d+)\[n=(\d+)\]:\s*(.*)$")


def parse_poly(text: str) -> FieldPoly:
    """Inverse of :func:`format_poly`."""
    m = _HEAD.match(text)
    if not m:
        raise ParseError("expected 'F<q>[n=<n>]: <terms>'")
    q, n, body = int(m.group(1)), int(m.group(2)), m.group(3).strip()
    terms: dict[int, int] = {}
    if body != "0":
        for tok in body.split("+"):
            tok = tok.strip()
            coef, mono = 1, 0
            for factor in tok.split("*"):
                factor = factor.strip()
                if factor.startswith("x") and factor[1:].isdigit():
                    mono |= 1 << (int(factor[1:]) - 1)
                elif factor.isdigit():
                    coef *= int(factor)
                else:
                    raise ParseError(f"bad factor {factor!r} in term {tok!r}")
            terms[mono] = terms.get(mono, 0) + coef
    return FieldPoly(q, n, terms)


def _bits_mask(x, n: int) -> int:
    if isinstance(x, (int, np.integer)):
        return int(x)
    bits = [int(b) for b in x]
    if len(bits) != n:
        raise InputError(f"point has length {len(bits)}, polynomial has {n} variables")
    if any(b not in (0, 1) for b in bits):
        raise InputError("point coordinates must be 0/1")
    return sum(b << i for i, b in enumerate(bits))


def poly_eval(p: FieldPoly, x) -> FieldElem:
    """Value at a boolean point given as a bit sequence (x1 first) or a mask."""
    mask = _bits_mask(x, p.nvars)
    return FieldElem(sum(c for m, c in p.terms.items() if m & mask == m), p.q)


def poly_mul(a: FieldPoly, b: FieldPoly) -> FieldPoly:
    """Product with x_i^2 reduced to x_i."""
    a._check(b)
    q, n = a.q, a.nvars
    if not a.terms or not b.terms:
        return FieldPoly(q, n)
    work = len(a.terms) * len(b.terms)
    if n <= DENSE_LIMIT and work > (n + 1) << n:
        # OR-convolution of coefficient vectors = pointwise product of values
        return FieldPoly.from_table(q, a.table() * b.table() % q)
    out: dict[int, int] = {}
    for ma, ca in a.terms.items():
        for mb, cb in b.terms.items():
            m = ma | mb
            out[m] = (out.get(m, 0) + ca * cb) % q
    return FieldPoly(q, n, out)


def poly_pow_fermat(a: FieldPoly) -> FieldPoly:
    """a^(q-1): the indicator of a being nonzero at each boolean point."""
    q = a.q
    if q == 2:
        return a
    if a.nvars <= DENSE_LIMIT:
        v = a.table()
        return FieldPoly.from_table(q, np.where(v % q == 0, 0, 1))
    result, base, e = FieldPoly.const(q, a.nvars, 1), a, q - 1
    while e:
        if e & 1:
            result = poly_mul(result, base)
        e >>= 1
        if e:
            base = poly_mul(base, base)
    return result


def _point_key(pt, n: int) -> int:
    if isinstance(pt, str):
        pt = [int(ch) for ch in pt]
    return _bits_mask(pt, n)


def interpolate_ball(truth: Mapping, n: int, k: int, q: int,
                     cap: int = DEFAULT_TERM_CAP) -> FieldPoly:
    """Unique degree-<=k multilinear polynomial matching ``truth`` on the radius-k ball.

    Keys of ``truth`` may be masks, bit sequences (x1 first) or bit strings.
    Coefficients come from Moebius inversion over the ball, which is closed
    under taking subsets.
    """
    q = require_prime(q)
    k = min(k, n)
    size = ball_size(n, k)
    if size > cap:
        raise ResourceError(f"ball of radius {k} in {n} variables has {size} points (cap {cap})")
    vals: dict[int, int] = {}
    for pt, v in truth.items():
        m = _point_key(pt, n)
        if m in vals:
            raise InputError(f"point {mask_vars(m)} given twice")
        vals[m] = int(v) % q
    pts = ball_points(n, k)
    missing = [p for p in pts if p not in vals]
    extra = len(vals) - (size - len(missing))
    if missing:
        raise InputError(f"{len(missing)} ball points missing, e.g. {mask_vars(missing[0])}")
    if extra:
        raise InputError(f"{extra} points outside the radius-{k} ball")
    for i in range(n):
        bit = 1 << i
        for p in pts:
            if p & bit:
                vals[p] = (vals[p] - vals[p ^ bit]) % q
    return FieldPoly(q, n, vals)


def interpolate_table(values: np.ndarray, k: int, q: int) -> FieldPoly:
    """Interpolate from a full value table, reading only its radius-k ball."""
    n = values.shape[-1].bit_length() - 1
    return interpolate_ball({p: int(values[p]) for p in ball_points(n, k)}, n, k, q)
