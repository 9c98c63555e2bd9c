"""Randomness-efficient circuits for G(k) gates.

The weight detector hashes every (k+1)-subset of the inputs with m random
GF(2) vectors; some hash level isolates a single live subset with constant
probability whenever the input weight exceeds k. From it we build the
depth-5 probabilistic circuit, and collapse it to depth 2 by expanding
MOD_p-of-AND-of-MOD_p layers as polynomials.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb

import numpy as np

from . import transforms
from ._util import DEFAULT_TERM_CAP, reps_for, require_prime, rng
from .algebra import FieldPoly, interpolate_ball, poly_pow_fermat
from .ball import ball_points
from .circuit import (CONST0, CONST1, Circuit, CircuitBuilder, GateKind, Node,
                      fold_constants, restrict, truth_table)
from .errors import InputError, ResourceError, UnsupportedInputError
from .restriction import Restriction

SET_CAP = 1 << 20


# hashing of (k+1)-subsets ------------------------------------------------------

def subset_family(f: int, k: int) -> list[int]:
    """All (k+1)-subsets of f inputs as masks, in canonical ball order."""
    return [p for p in ball_points(f, k + 1) if bin(p).count("1") == k + 1]


def hash_width(f: int, k: int) -> int:
    """m = floor(log2 binom(f, k+1)) + 1, or 0 when there are no such subsets."""
    return comb(f, k + 1).bit_length()


def copies_for(eps: float) -> int:
    """Independent detector copies so that (3/4)^copies <= eps."""
    return reps_for(4 / 3, eps)


def draw_hash(gen: np.random.Generator, copies: int, m: int) -> np.ndarray:
    """(copies, m, m) random bits: vector i of copy c is w[c, i, :]."""
    return gen.integers(0, 2, size=(copies, m, m), dtype=np.int64)


@dataclass(frozen=True)
class DetectorLayout:
    """Static data of the detector over a gate of fan-in f."""

    fanin: int
    k: int
    sets: tuple[int, ...]
    m: int
    members: np.ndarray   # (nsets, k+1) input positions
    codebits: np.ndarray  # (nsets, m) bits of rank+1

    @classmethod
    @lru_cache(maxsize=64)
    def build(cls, fanin: int, k: int) -> "DetectorLayout":
        n_sets = comb(fanin, k + 1)
        if n_sets > SET_CAP:
            raise ResourceError(f"{n_sets} subsets of size {k + 1} exceed cap {SET_CAP}")
        sets = tuple(subset_family(fanin, k))
        m = hash_width(fanin, k)
        members = np.array([[i for i in range(fanin) if s >> i & 1] for s in sets],
                           dtype=np.int64).reshape(len(sets), k + 1)
        codes = np.arange(1, len(sets) + 1, dtype=np.int64)
        codebits = (codes[:, None] >> np.arange(m)) & 1
        return cls(fanin, k, sets, m, members, codebits)

    def alive(self, w: np.ndarray) -> np.ndarray:
        """(..., copies, m+1, nsets): set S survives levels 1..l when <S, w_i> = 0 for i <= l."""
        par = np.einsum("...cij,sj->...cis", w, self.codebits) & 1
        ok = np.logical_and.accumulate(par == 0, axis=-2)
        lead = ok.shape[:-2]
        level0 = np.ones(lead + (1, ok.shape[-1]), dtype=bool)
        return np.concatenate([level0, ok], axis=-2)

    def monomials(self, ins: np.ndarray) -> np.ndarray:
        """(..., nsets, N) values of x^S for each subset S."""
        return np.prod(ins[..., self.members, :], axis=-2)

    def counts(self, ins: np.ndarray, w: np.ndarray) -> np.ndarray:
        """(..., copies, m+1, N) number of live subsets fully contained in x."""
        a = self.alive(w).astype(np.float64)
        x = self.monomials(ins).astype(np.float64)
        return np.rint(np.matmul(a, x)).astype(np.int64)


def detector_values(layout: DetectorLayout, ins: np.ndarray, w: np.ndarray, q: int) -> np.ndarray:
    """C2' at every point: product over copies and levels of [count != 1 (mod q)].

    ``ins`` holds 0/1 input values, shape (..., f, N). The factors are
    computed as (count - 1)^(q-1) mod q, the proper polynomial form.
    """
    if not layout.sets:
        return np.ones(ins.shape[:-2] + ins.shape[-1:], dtype=np.int64)
    a = layout.alive(w).astype(np.float64)
    x = layout.monomials(ins).astype(np.float64)
    cnt = np.rint(np.matmul(a, x)) % q
    return (cnt != 1).all(axis=(-3, -2)).astype(np.int64)


def _fermat(a: np.ndarray, q: int) -> np.ndarray:
    # a^(q-1) mod q for prime q is exactly [a != 0 mod q]
    return (a % q != 0).astype(np.int64)


def isolation_frequency(fanin: int, k: int, x_mask: int, trials: int, seed: int = 0) -> float:
    """Fraction of hash draws for which some level leaves exactly one live subset inside x."""
    lay = DetectorLayout.build(fanin, k)
    ins = ((np.array([x_mask]) >> np.arange(fanin)[:, None]) & 1).astype(np.int64)
    w = np.stack([draw_hash(rng(seed, t), 1, lay.m)[0] for t in range(trials)])
    cnt = lay.counts(ins, w[:, None])  # (trials, 1, m+1, 1)
    return float(np.mean(np.any(cnt[:, 0, :, 0] == 1, axis=-1)))


@dataclass(frozen=True)
class DetectorThr:
    """One-sided weight detector as a threshold source: Q = 1 - C2'.

    Q is 0 on every input of weight <= k, and 1 with probability >= 1 - eps
    above it.
    """

    k: int
    eps: float
    one_sided: bool = True

    @property
    def copies(self) -> int:
        return copies_for(self.eps)

    @property
    def error(self) -> float:
        return self.eps

    def degree_bound(self, fanin: int) -> int:
        if comb(fanin, self.k + 1) == 0:
            return 0
        return self.copies * (hash_width(fanin, self.k) + 1) * (self.k + 1)

    def draw(self, gen: np.random.Generator, fanin: int):
        lay = DetectorLayout.build(fanin, self.k)
        return lay, draw_hash(gen, self.copies, lay.m)

    def apply(self, params, ins: np.ndarray, q: int) -> np.ndarray:
        lay, w = params
        return (1 - detector_values(lay, ins, w, q)) % q


# the depth-5 circuit ----------------------------------------------------------

def normalized_table(kind: GateKind) -> tuple[tuple[int, ...], bool]:
    """Ball values of the default-0 form of a GK gate and whether to negate."""
    if kind.default:
        return tuple(1 - b for b in kind.table), True
    return tuple(kind.table), False


@dataclass(frozen=True)
class ProbCircuitSampler:
    """Circuit over n inputs followed by r random bits."""

    circuit: Circuit
    ninputs: int
    nrandom: int
    eps: float
    profile: tuple[str, ...]
    q: int
    k: int
    copies: int
    m: int
    gate: GateKind | None = None
    _layout: DetectorLayout | None = field(default=None, repr=False, compare=False)

    def hash_bits(self, seed: int) -> np.ndarray:
        return draw_hash(rng(seed), self.copies, self.m)

    def random_bits(self, seed: int) -> tuple[int, ...]:
        return tuple(int(b) for b in self.hash_bits(seed).ravel())

    def instantiate(self, seed: int) -> Circuit:
        """Circuit over the n real inputs with the seed's random bits wired in."""
        vals = (None,) * self.ninputs + self.random_bits(seed)
        return restrict(self.circuit, Restriction(vals))

    def circuit_table(self, seed: int) -> np.ndarray:
        return truth_table(self.instantiate(seed)).bits.astype(np.int64)

    def fast_tables(self, seeds) -> np.ndarray:
        """Output on all 2^n points for each seed, without building circuits."""
        n, seeds = self.ninputs, list(seeds)
        ins = transforms.input_columns(n)
        if self.m:
            per_seed = max(1, self.copies * (self.m + 1) << n)
            chunk = max(1, (1 << 22) // per_seed)
            det = np.concatenate([
                detector_values(self._layout, ins, np.stack([self.hash_bits(s) for s in seeds[i:i + chunk]]), self.q)
                for i in range(0, len(seeds), chunk)]) if seeds else np.zeros((0, 1 << n), np.int64)
        else:
            det = np.ones((len(seeds), 1 << n), dtype=np.int64)
        if self.gate is None:
            return det
        vals, neg = normalized_table(self.gate)
        c1 = _c1_values(vals, n, self.k, self.q)
        out = c1[None, :] * det
        return 1 - out if neg else out


def _c1_values(ball_vals, n: int, k: int, q: int) -> np.ndarray:
    p = interpolate_ball(dict(zip(ball_points(n, k), ball_vals)), n, k, q)
    return (p.table() % q != 0).astype(np.int64)


def _detector_layers(b: CircuitBuilder, xs: list[int], rbits: list[int], k: int, q: int,
                     copies: int, lay: DetectorLayout) -> list[int]:
    """Adds the D-gates of every copy; returns their references."""
    m = lay.m
    negs: dict[int, int] = {}

    def lit(r, positive):
        if positive:
            return r
        if r not in negs:
            negs[r] = b.NOT(r)
        return negs[r]

    ones = [CONST1] * (q - 1)
    dgates = []
    for c in range(copies):
        wv = [[rbits[c * m * m + i * m + j] for j in range(m)] for i in range(m)]
        zero_test = {}
        for s_idx, members in enumerate(lay.members):
            for i in range(m):
                used = [wv[i][j] for j in range(m) if lay.codebits[s_idx, j]]
                # even-parity DNF; at most one clause fires, so MOD_q acts as OR
                clauses = []
                for assign in range(1 << len(used)):
                    if bin(assign).count("1") % 2:
                        continue
                    clauses.append(b.AND(*[lit(r, assign >> t & 1) for t, r in enumerate(used)]))
                zero_test[s_idx, i] = b.MOD(q, *clauses)
        for level in range(m + 1):
            bs = []
            for s_idx, members in enumerate(lay.members):
                bs.append(b.AND(*[xs[i] for i in members], *[zero_test[s_idx, i] for i in range(level)]))
            dgates.append(b.MOD(q, *bs, *ones))
    return dgates


def _c1_gate(b: CircuitBuilder, xs: list[int], ball_vals, n: int, k: int, q: int) -> int:
    """MOD_q of ANDs realising the interpolant; coefficient c becomes c copies."""
    p = interpolate_ball(dict(zip(ball_points(n, k), ball_vals)), n, k, q)
    ops = []
    for mono, coef in sorted(p.monomials().items(), key=lambda t: (len(t[0]), t[0])):
        for _ in range(coef):
            ops.append(b.AND(*[xs[v - 1] for v in mono]) if mono else CONST1)
    return b.MOD(q, *ops)


def vv_gk_circuit(kind: GateKind, fanin: int, q: int, eps: float) -> ProbCircuitSampler:
    """Depth-5 probabilistic circuit for a G(k) gate: C1 AND (copies of C2)."""
    if kind.name != "GK":
        raise InputError("vv_gk_circuit expects a GK gate")
    q = require_prime(q)
    n, k = fanin, kind.k
    lay = DetectorLayout.build(n, k)
    copies = copies_for(eps) if lay.sets else 0
    r = copies * lay.m * lay.m
    b = CircuitBuilder(n + r, "vv")
    xs = list(range(n))
    vals, neg = normalized_table(kind)
    c1 = _c1_gate(b, xs, vals, n, k, q)
    ds = _detector_layers(b, xs, list(range(n, n + r)), k, q, copies, lay)
    top = b.AND(c1, *ds)
    profile = ("AND", "MOD", "AND", "MOD", "AND")
    if neg:
        top = b.MOD(q, top, *([CONST1] * (q - 1)))
        profile = ("MOD",) + profile
    return ProbCircuitSampler(b.build([top]), n, r, eps, profile, q, k, copies, lay.m, kind, lay)


def vv_detector_circuit(fanin: int, k: int, q: int, copies: int = 1) -> ProbCircuitSampler:
    """Only the detector: AND of the D-gates of ``copies`` hash families.

    Outputs 1 on every input of weight <= k.
    """
    q = require_prime(q)
    lay = DetectorLayout.build(fanin, k)
    copies = copies if lay.sets else 0
    r = copies * lay.m * lay.m
    b = CircuitBuilder(fanin + r, "detector")
    ds = _detector_layers(b, list(range(fanin)), list(range(fanin, fanin + r)), k, q, copies, lay)
    top = b.AND(*ds)
    eps = 0.75 ** copies if copies else 0.0
    return ProbCircuitSampler(b.build([top]), fanin, r, eps, ("AND", "MOD", "AND", "MOD", "AND"),
                              q, k, copies, lay.m, None, lay)


def layer_profile(c: Circuit) -> list[set[str]]:
    """Gate kinds found at each distance from the output (NOT gates skipped)."""
    n = c.ninputs
    height = [0] * len(c.nodes)
    for r in c.outputs:
        if r >= n:
            height[r - n] = 1
    for j in range(len(c.nodes) - 1, -1, -1):
        h = height[j]
        if not h:
            continue
        step = 0 if c.nodes[j].kind.name == "NOT" else 1
        for r in c.nodes[j].inputs:
            if r >= n:
                height[r - n] = max(height[r - n], h + step)
    layers: list[set[str]] = []
    for j, nd in enumerate(c.nodes):
        if nd.kind.name == "NOT" or not height[j]:
            continue
        while len(layers) < height[j]:
            layers.append(set())
        layers[height[j] - 1].add(nd.kind.name)
    return layers


# Allender-Hertrampf collapse ---------------------------------------------------

@dataclass(frozen=True)
class AHResult:
    circuit: Circuit
    p: int
    s1: int
    t: int
    s2: int
    r: int
    and_count: int
    max_fanin: int
    negated_middles: bool = False

    @property
    def size_bound(self) -> int:
        """s1 s2^(t(p-1)) for the plain shape.

        A negated middle MOD reads 1 - v: one more monomial per factor, and
        merged coefficients may be anything up to p-1, each costing one AND.
        """
        if not self.negated_middles:
            return self.s1 * self.s2 ** (self.t * (self.p - 1))
        return (self.p - 1) * self.s1 * (self.s2 ** (self.p - 1) + 1) ** self.t

    @property
    def fanin_bound(self) -> int:
        return self.r * self.t * (self.p - 1)


def _shape(c: Circuit):
    """Split a MOD_p/AND/MOD_p/AND circuit into nested operand lists.

    Literals are (input, positive) pairs. Returns p, the top terms and the
    bottom atoms; raises InputError on any other shape.
    """
    n = c.ninputs
    if len(c.outputs) != 1 or c.outputs[0] < n:
        raise InputError("expected a single gate output")

    def node(r):
        return c.nodes[r - n] if r >= n else None

    def is_mod(nd):
        return nd is not None and nd.kind.name == "MOD"

    top = node(c.outputs[0])
    if not is_mod(top):
        raise InputError("top gate must be MOD_p")
    p = top.kind.m
    try:
        require_prime(p)
    except InputError:
        raise UnsupportedInputError(f"modulus {p} is not prime") from None

    def literal(r):
        if r >= 0 and r < n:
            return (r, True)
        nd = node(r)
        if nd is not None and nd.kind.name == "NOT" and 0 <= nd.inputs[0] < n:
            return (nd.inputs[0], False)
        return None

    def atom(r):
        """Bottom AND as a literal tuple, None for constant 0."""
        if r == CONST1:
            return ()
        if r == CONST0:
            return None
        lt = literal(r)
        if lt is not None:
            return (lt,)
        nd = node(r)
        if nd is None or nd.kind.name != "AND":
            raise InputError("third layer must feed from AND gates of literals")
        lits = []
        for a in nd.inputs:
            if a == CONST0:
                return None
            if a == CONST1:
                continue
            lt = literal(a)
            if lt is None:
                raise InputError("bottom AND gates may only read literals and constants")
            lits.append(lt)
        return tuple(lits)

    def middle(r):
        """A third-layer MOD, possibly negated, as (positive, atoms, fan-in)."""
        nd = node(r)
        positive = True
        if nd is not None and nd.kind.name == "NOT":
            positive, nd = False, node(nd.inputs[0])
        if not is_mod(nd) or nd.kind.m != p:
            raise InputError(f"second layer must feed from MOD_{p} gates")
        return positive, [atom(a) for a in nd.inputs], len(nd.inputs)

    terms = []
    t = s2 = r_max = 0
    for r in top.inputs:
        if r in (CONST0, CONST1):
            terms.append([] if r == CONST1 else None)
            continue
        nd = node(r)
        if nd is None or nd.kind.name != "AND":
            raise InputError("top MOD must feed from AND gates or constants")
        factors = []
        for a in nd.inputs:
            if a == CONST1:
                continue
            if a == CONST0:
                factors = None
                break
            pos, atoms, fan = middle(a)
            s2 = max(s2, fan)
            r_max = max([r_max] + [len(at) for at in atoms if at is not None])
            factors.append((pos, atoms))
        t = max(t, len(nd.inputs))
        terms.append(factors)
    return p, terms, len(top.inputs), t, s2, r_max


def ah_collapse(c: Circuit, cap: int = DEFAULT_TERM_CAP) -> AHResult:
    """Collapse MOD_p(AND(MOD_p(AND(literals)))) into MOD_p of ANDs.

    Each inner MOD becomes (sum of atoms)^(p-1), or 1 minus that when
    negated; products over the AND layer are expanded into monomials over
    literals, coefficients mod p are realised as repeated AND gates.
    Monomials holding a literal and its negation vanish and are dropped.
    """
    p, terms, s1, t, s2, r = _shape(c)
    n = c.ninputs
    has_neg = any(not lit[1] for fac in terms if fac for _, atoms in fac
                  for a in atoms if a for lit in a)
    nv = 2 * n if has_neg else n

    def amask(a):
        m = 0
        for v, pos in a:
            m |= 1 << (v if pos else n + v)
        return m

    if nv <= 22:
        size = 1 << nv
        idx = np.arange(size, dtype=np.int64)
        total = np.zeros(size, dtype=np.int64)
        # every factor is a 0/1 indicator, so products are ANDs of boolean arrays
        for fac in terms:
            if fac is None:
                continue
            prod = np.ones(size, dtype=bool)
            for pos, atoms in fac:
                lin = np.zeros(size, dtype=np.int32)
                for a in atoms:
                    if a is not None:
                        m = amask(a)
                        lin += (idx & m) == m
                v = lin % p != 0
                prod &= v if pos else ~v
            total += prod
        coef = transforms.mobius(total % p, p)
        mono = {int(m): int(coef[m]) for m in np.flatnonzero(coef)}
    else:
        total = FieldPoly(p, nv)
        for fac in terms:
            if fac is None:
                continue
            prod = FieldPoly.const(p, nv, 1)
            for pos, atoms in fac:
                lin = FieldPoly(p, nv, {})
                for a in atoms:
                    if a is not None:
                        lin = lin + FieldPoly(p, nv, {amask(a): 1})
                v = poly_pow_fermat(lin)
                prod = prod * (v if pos else 1 - v)
                if len(prod.terms) > cap:
                    raise ResourceError(f"expansion exceeds {cap} terms")
            total = total + prod
        mono = dict(total.terms)
    if has_neg:
        low = (1 << n) - 1
        mono = {m: cf for m, cf in mono.items() if not (m & low) & (m >> n)}
    if sum(mono.values()) > cap:
        raise ResourceError(f"collapsed circuit would need {sum(mono.values())} AND gates")

    b = CircuitBuilder(n, "ah")
    negs: dict[int, int] = {}
    ands = []
    max_fanin = 0
    for m in sorted(mono, key=lambda v: (bin(v).count("1"), v)):
        lits = [i for i in range(n) if m >> i & 1]
        if has_neg:
            for i in range(n):
                if m >> (n + i) & 1:
                    if i not in negs:
                        negs[i] = b.NOT(i)
                    lits.append(negs[i])
        max_fanin = max(max_fanin, len(lits))
        for _ in range(mono[m]):
            ands.append(b.AND(*lits))
    top = b.MOD(p, *ands)
    negated = any(not pos for fac in terms if fac for pos, _ in fac)
    return AHResult(b.build([top]), p, s1, t, s2, r, len(ands), max_fanin, negated)


# depth 2 ---------------------------------------------------------------------

@dataclass(frozen=True)
class Depth2Sampler:
    """Per seed, a MOD_q of ANDs equal to the depth-5 circuit under the same random bits."""

    base: ProbCircuitSampler

    @property
    def q(self) -> int:
        return self.base.q

    def collapse(self, seed: int) -> AHResult:
        c = fold_constants(self.base.instantiate(seed))
        n, q = c.ninputs, self.q
        out = c.outputs[0]
        if out in (CONST0, CONST1):
            b = CircuitBuilder(n, "const")
            top = b.MOD(q, *([b.AND()] if out == CONST1 else []))
            cc = b.build([top])
            return AHResult(cc, q, 1, 0, 0, 0, len(cc.nodes) - 1, 0)
        top = c.nodes[out - n]
        if top.kind.name == "AND":
            # dummy fan-in-1 MOD on top so the layers read MOD/AND/MOD/AND
            c = Circuit(n, c.nodes + (Node(GateKind("MOD", m=q), (out,)),), (n + len(c.nodes),), c.name)
        return ah_collapse(c)

    def sample(self, seed: int) -> Circuit:
        return self.collapse(seed).circuit


def gk_depth2(kind: GateKind, fanin: int, q: int, eps: float) -> Depth2Sampler:
    return Depth2Sampler(vv_gk_circuit(kind, fanin, q, eps))


def depth2_as_poly(c: Circuit, q: int) -> FieldPoly:
    """Read a MOD_q of ANDs as the polynomial sum of its AND monomials."""
    n = c.ninputs
    top = c.nodes[c.outputs[0] - n]
    terms: dict[int, int] = {}
    for r in top.inputs:
        if r == CONST1:
            m = 0
        elif r == CONST0:
            continue
        else:
            nd = c.nodes[r - n]
            if nd.kind.name != "AND" or any(not 0 <= a < n for a in nd.inputs):
                raise InputError("expected ANDs of positive literals under the top MOD")
            m = 0
            for a in nd.inputs:
                m |= 1 << a
        terms[m] = terms.get(m, 0) + 1
    return FieldPoly(q, n, terms)
