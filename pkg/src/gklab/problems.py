"""Relation problems with brute-force solvers and verifiers, correlation, counting, XOR lemma."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import transforms
from ._util import require_prime, rng
from .ball import ball_size
from .circuit import Circuit, GateKind, TruthTable, single_gate, truth_table
from .errors import InputError, ResourceError

HLF_MAX_VARS = 20


# 2D hidden linear function ------------------------------------------------------

@dataclass(frozen=True)
class HlfInstance:
    side: int
    A: np.ndarray   # (n, n) 0/1 grid adjacency
    b: np.ndarray   # (n,) entries in 0..3

    @property
    def n(self) -> int:
        return self.side * self.side

    def to_json(self) -> dict:
        return {"grid": self.side, "A": "".join(str(int(v)) for v in self.A.ravel()),
                "b": "".join(str(int(v)) for v in self.b)}

    @classmethod
    def from_json(cls, d: dict) -> "HlfInstance":
        g = int(d["grid"])
        n = g * g
        A = np.array([int(ch) for ch in d["A"]], dtype=np.int64).reshape(n, n)
        b = np.array([int(ch) for ch in d["b"]], dtype=np.int64)
        inst = cls(g, A, b)
        if not np.array_equal(A, grid_adjacency(g)) or b.shape != (n,) or b.min(initial=0) < 0 or b.max(initial=0) > 3:
            raise InputError("instance must carry the grid adjacency and b in {0,1,2,3}^n")
        return inst


def grid_adjacency(side: int) -> np.ndarray:
    n = side * side
    A = np.zeros((n, n), dtype=np.int64)
    for i in range(side):
        for j in range(side):
            v = i * side + j
            if j + 1 < side:
                A[v, v + 1] = A[v + 1, v] = 1
            if i + 1 < side:
                A[v, v + side] = A[v + side, v] = 1
    return A


def random_hlf(side: int, seed: int) -> HlfInstance:
    if side < 1:
        raise InputError("grid side must be positive")
    return HlfInstance(side, grid_adjacency(side), rng(seed).integers(0, 4, size=side * side))


def _all_vectors(n: int) -> np.ndarray:
    if n > HLF_MAX_VARS:
        raise ResourceError(f"{n} variables exceed the enumeration cap {HLF_MAX_VARS}")
    return transforms.input_columns(n).T   # (2^n, n), row x = bits of x


def hlf_values(inst: HlfInstance, us: np.ndarray) -> np.ndarray:
    """q(u) = u^T A u + b^T u mod 4 for each row u."""
    us = np.asarray(us, dtype=np.int64)
    return (np.einsum("...i,ij,...j->...", us, inst.A, us) + us @ inst.b) % 4


def linearity_set(inst: HlfInstance, definitional: bool = False) -> np.ndarray:
    """Indices x (bit i = u_{i+1}) of L_q.

    The default path checks q(u+v) = q(u) + q(v) against each unit vector v;
    the definitional path checks every v and costs 4^n.
    """
    n = inst.n
    us = _all_vectors(n)
    qu = hlf_values(inst, us)
    if definitional:
        if n > 12:
            raise ResourceError("definitional linearity test limited to n <= 12")
        idx = np.arange(1 << n)
        ok = np.all(qu[idx[:, None] ^ idx[None, :]] == (qu[:, None] + qu[None, :]) % 4, axis=1)
        return np.flatnonzero(ok)
    ok = np.ones(1 << n, dtype=bool)
    for j in range(n):
        flip = np.arange(1 << n) ^ (1 << j)
        ok &= qu[flip] == (qu + qu[1 << j]) % 4
    return np.flatnonzero(ok)


def _gf2_solve(rows: np.ndarray, rhs: np.ndarray) -> np.ndarray | None:
    """Some z with rows @ z = rhs over GF(2), or None."""
    M = np.concatenate([rows % 2, (rhs % 2)[:, None]], axis=1).astype(np.uint8)
    nr, nc = M.shape[0], M.shape[1] - 1
    piv_cols, r = [], 0
    for c in range(nc):
        hit = np.flatnonzero(M[r:, c]) if r < nr else []
        if len(hit) == 0:
            continue
        p = r + hit[0]
        M[[r, p]] = M[[p, r]]
        others = np.flatnonzero(M[:, c])
        others = others[others != r]
        M[others] ^= M[r]
        piv_cols.append(c)
        r += 1
        if r == nr:
            break
    if np.any(M[r:, nc]):
        return None
    z = np.zeros(nc, dtype=np.int64)
    for i, c in enumerate(piv_cols):
        z[c] = M[i, nc]
    return z


def _basis(vectors: np.ndarray) -> np.ndarray:
    basis: list[np.ndarray] = []
    reduced: list[tuple[int, np.ndarray]] = []
    for v in vectors:
        w = v.copy() % 2
        for lead, bv in reduced:
            if w[lead]:
                w ^= bv
        nz = np.flatnonzero(w)
        if len(nz):
            reduced.append((int(nz[0]), w))
            basis.append(v % 2)
    return np.array(basis, dtype=np.int64).reshape(len(basis), vectors.shape[1])


def solve_2dhlf_bruteforce(inst: HlfInstance) -> np.ndarray:
    """A vector z with q(x) = 2 z.x (mod 4) on all of L_q."""
    n = inst.n
    members = linearity_set(inst)
    ms = set(members.tolist())
    sample = members[: min(len(members), 256)]
    for u in sample:
        for v in sample:
            if int(u) ^ int(v) not in ms:
                raise AssertionError("L_q is not closed under addition")
    vecs = ((members[:, None] >> np.arange(n)) & 1).astype(np.int64)
    B = _basis(vecs)
    qv = hlf_values(inst, B) if len(B) else np.zeros(0, np.int64)
    if np.any(qv % 2):
        raise AssertionError("q takes an odd value on L_q")
    z = _gf2_solve(B, qv // 2) if len(B) else np.zeros(n, dtype=np.int64)
    if z is None:
        raise AssertionError("no linear form matches q on the basis of L_q")
    return z


def verify_2dhlf(inst: HlfInstance, z) -> bool:
    z = np.asarray(z, dtype=np.int64) % 2
    if z.shape != (inst.n,):
        raise InputError(f"z must have length {inst.n}")
    members = linearity_set(inst)
    vecs = ((members[:, None] >> np.arange(inst.n)) & 1).astype(np.int64)
    return bool(np.all(hlf_values(inst, vecs) == (2 * (vecs @ z)) % 4))


# relation problems -----------------------------------------------------------------

BENDING_FRACTION = Fraction(2, 3) + Fraction(5, 1000)


@dataclass(frozen=True)
class RelationInstance:
    tag: str                      # PHP | ParityBending3 | QRParityBending | ThreeOutputMod3
    inputs: tuple[str, ...]       # bit or trit strings
    q: int | None = None          # modulus for QRParityBending

    def __post_init__(self):
        if self.tag not in ("PHP", "ParityBending3", "QRParityBending", "ThreeOutputMod3"):
            raise InputError(f"unknown relation tag {self.tag!r}")
        alphabet = "012" if self.tag in ("ParityBending3", "ThreeOutputMod3") else "01"
        for s in self.inputs:
            if any(ch not in alphabet for ch in s):
                raise InputError(f"{self.tag} inputs use the alphabet {alphabet}")
        if self.tag == "QRParityBending" and (self.q is None or self.q < 2):
            raise InputError("QRParityBending needs a modulus q >= 2")
        if self.tag == "ThreeOutputMod3" and len(self.inputs) != 1:
            raise InputError("ThreeOutputMod3 takes a single trit string")


@dataclass(frozen=True)
class RelationVerdict:
    success: bool
    fraction: float
    per_coordinate: tuple[bool, ...]
    required: str
    diagnostic: str = ""

    def to_json(self) -> dict:
        return {"success": self.success, "fraction": self.fraction,
                "per_coordinate": [int(b) for b in self.per_coordinate], "required": self.required,
                "diagnostic": self.diagnostic}


def _weight(s: str) -> int:
    """Sum of the symbols (Hamming weight for bits, digit sum for trits)."""
    return sum(int(ch) for ch in s)


def encode_trits(s: str) -> str:
    """Two bits per trit: 0 -> 00, 1 -> 01, 2 -> 10."""
    return "".join({"0": "00", "1": "01", "2": "10"}[ch] for ch in s)


def decode_trits(bits: str) -> str:
    table = {"00": "0", "01": "1", "10": "2"}
    if len(bits) % 2:
        raise InputError("trit encoding needs an even number of bits")
    try:
        return "".join(table[bits[i:i + 2]] for i in range(0, len(bits), 2))
    except KeyError:
        raise InputError("11 is not a trit code") from None


def verify_relation(inst: RelationInstance, output: Sequence[str]) -> RelationVerdict:
    tag, xs = inst.tag, inst.inputs
    output = list(output)
    if tag == "ThreeOutputMod3":
        if len(output) != 1 or output[0] not in ("0", "1", "2"):
            raise InputError("ThreeOutputMod3 output is a single trit")
        ok = int(output[0]) == _weight(xs[0]) % 3
        return RelationVerdict(ok, float(ok), (ok,), "y = |x| mod 3")
    if len(output) != len(xs):
        raise InputError(f"expected {len(xs)} output strings, got {len(output)}")
    if any(ch not in "01" for y in output for ch in y):
        raise InputError("outputs are bit strings")
    if tag == "PHP":
        odd = [i for i, x in enumerate(xs) if _weight(x) % 2]
        if odd:
            return RelationVerdict(False, 0.0, (), "all coordinates",
                                   f"promise violated: inputs {odd} have odd parity")
        per = tuple(_weight(y) % 2 == (_weight(x) // 2) % 2 for x, y in zip(xs, output))
        return RelationVerdict(all(per), sum(per) / max(1, len(per)), per, "all coordinates")
    if tag == "ParityBending3":
        per = tuple((_weight(y) % 2 == 0) == (_weight(x) % 3 == 0) for x, y in zip(xs, output))
    else:
        per = tuple((_weight(y) % inst.q == 0) == (_weight(x) % 2 == 0) for x, y in zip(xs, output))
    good = sum(per)
    ok = Fraction(good, max(1, len(per))) >= BENDING_FRACTION
    return RelationVerdict(ok, good / max(1, len(per)), per, "fraction >= 2/3 + 0.005")


def bending_threshold(r: int) -> int:
    """Least number of correct coordinates out of r that passes."""
    return math.ceil(BENDING_FRACTION * r)


# correlation ---------------------------------------------------------------------

def _target_bits(target, n: int) -> np.ndarray:
    if isinstance(target, TruthTable):
        if target.nvars != n:
            raise InputError("target arity differs from the circuit")
        return target.bits
    if isinstance(target, Circuit):
        return truth_table(target).bits
    if isinstance(target, GateKind):
        return truth_table(single_gate(target, n)).bits
    if target == "MAJ":
        return 2 * transforms.popcounts(n) >= n
    if isinstance(target, str) and target.startswith("MOD"):
        r = int(target[3:])
        return transforms.popcounts(n) % r != 0
    raise InputError(f"unsupported target {target!r}")


def exact_correlation(c, target) -> float:
    """Pr_x[c(x) = target(x)] over uniform x, by full truth tables."""
    f = c if isinstance(c, TruthTable) else truth_table(c)
    g = _target_bits(target, f.nvars)
    return float(np.mean(f.bits == g))


def best_linear_agreement(n: int, q: int = 3, target: str = "MAJ") -> tuple[float, tuple[int, ...]]:
    """Max over degree-1 polynomials a0 + sum a_i x_i over F_q of Pr[p(x) = target(x)].

    Exhaustive over all q^(n+1) polynomials for n <= 9. For larger n with a
    symmetric target, agreement depends only on how many coefficients take
    each value, so the search runs over those count vectors and exactly
    enumerates the input distribution through per-class binomials.
    """
    q = require_prime(q)
    if target == "MAJ":
        tgt = lambda w: int(2 * w >= n)
    elif target.startswith("MOD"):
        r = int(target[3:])
        tgt = lambda w: int(w % r != 0)
    else:
        raise InputError("target must be MAJ or MOD<r>")
    if n <= 9:
        return _linear_exhaustive(n, q, tgt)
    return _linear_symmetric(n, q, tgt)


def _linear_exhaustive(n, q, tgt):
    pts = transforms.input_columns(n)                    # (n, 2^n)
    truth = np.array([tgt(int(w)) for w in transforms.popcounts(n)])
    best, arg = -1.0, None
    total = q ** (n + 1)
    powers = q ** np.arange(n + 1, dtype=np.int64)
    for start in range(0, total, 4096):
        code = np.arange(start, min(total, start + 4096), dtype=np.int64)
        coef = (code[:, None] // powers) % q              # (B, n+1): a0, a1..an
        vals = (coef[:, :1] + coef[:, 1:] @ pts) % q
        agree = (vals == truth).mean(axis=1)
        i = int(np.argmax(agree))
        if agree[i] > best:
            best, arg = float(agree[i]), tuple(int(v) for v in coef[i])
    return best, arg


def _compositions(total: int, parts: int):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _linear_symmetric(n, q, tgt):
    best, arg = -1.0, None
    for counts in _compositions(n, q):
        # joint distribution of (number of ones in each class): convolve per-class binomials
        dist = {(0,) * q: 1}
        for cls, size in enumerate(counts):
            nxt = {}
            for key, mult in dist.items():
                for j in range(size + 1):
                    k2 = key[:cls] + (j,) + key[cls + 1:]
                    nxt[k2] = nxt.get(k2, 0) + mult * math.comb(size, j)
            dist = nxt
        for a0 in range(q):
            good = 0
            for key, mult in dist.items():
                val = (a0 + sum(v * j for v, j in enumerate(key))) % q
                good += mult * (val == tgt(sum(key)))
            frac = good / 2 ** n
            if frac > best:
                coeffs = tuple(v for v, size in enumerate(counts) for _ in range(size))
                best, arg = frac, (a0,) + coeffs
    return best, arg


# counting --------------------------------------------------------------------------

def counting_bounds(n: int, k: int, s_max: int = 1 << 20) -> dict:
    """Compare the number of G(k) gates with the number of size-s threshold circuits.

    log2 of (4s)^s (s+n+2)^s is compared against binom(n, <=k); the report gives
    the least s at which the circuit count reaches the gate count, i.e. every
    size below it is too small to compute all G(k) gates.
    """
    if n < 0 or k < 0:
        raise InputError("n and k must be nonnegative")
    k = min(k, n)
    ball = ball_size(n, k)

    def log_count(s):
        return s * (math.log2(4 * s) + math.log2(s + n + 2)) if s > 0 else 0.0

    crossing = None
    lo, hi = 1, 1
    while hi <= s_max and log_count(hi) < ball:
        lo, hi = hi, hi * 2
    if hi <= s_max or log_count(min(hi, s_max)) >= ball:
        hi = min(hi, s_max)
        while lo < hi:
            mid = (lo + hi) // 2
            if log_count(mid) >= ball:
                hi = mid
            else:
                lo = mid + 1
        crossing = lo if log_count(lo) >= ball else None
    return {"n": n, "k": k, "ball_size": ball, "log2_gk_gates_lower": ball,
            "exact_gk_gate_count_log2": ball + 1 if k < n else ball,
            "tc0_size_threshold": crossing,
            "log2_tc0_count_at_threshold": log_count(crossing) if crossing else None}


# XOR lemma -------------------------------------------------------------------------

@dataclass(frozen=True)
class XorReport:
    q: int
    r: int
    max_bias: float
    tv: float
    bound: float
    holds: bool

    def to_json(self) -> dict:
        return {"q": self.q, "r": self.r, "max_bias": self.max_bias, "tv": self.tv,
                "bound": self.bound, "holds": self.holds}


def xor_lemma_check(dist, q: int) -> XorReport:
    """Character biases of a distribution on Z_q^r versus its distance to uniform."""
    d = np.asarray(dist, dtype=float)
    r = d.ndim
    if d.shape != (q,) * r:
        raise InputError(f"distribution must have shape ({q},)*r")
    if q ** r > 1 << 20:
        raise ResourceError("group larger than 2^20")
    if np.any(d < -1e-15) or abs(d.sum() - 1) > 1e-9:
        raise InputError("distribution must be nonnegative and sum to 1")
    chars = np.fft.fftn(d)          # E[exp(-2 pi i <a, X>/q)] at every a
    bias = np.abs(chars).ravel()
    bias[0] = 0.0
    eps = float(bias.max()) if bias.size > 1 else 0.0
    tv = float(0.5 * np.abs(d - 1.0 / d.size).sum())
    bound = eps * math.sqrt(d.size)
    return XorReport(q, r, eps, tv, bound, tv <= bound + 1e-12)
