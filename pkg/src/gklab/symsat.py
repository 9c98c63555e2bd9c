"""SYM+ circuits, collapse of GC0(k)[q] circuits into them, and a splitting SAT solver."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom

from . import transforms
from ._util import check_vars, derive_seed, require_prime, rng
from .algebra import poly_eval
from .circuit import (CONST0, CONST1, Circuit, CircuitBuilder, GateKind, OR, Node,
                      evaluate, evaluate_columns, fold_constants, restrict, truth_table)
from .errors import InputError, ResourceError, UnsupportedInputError
from .probpoly import _GkInst, _Inst, _instantiate, _ModInst, _NotInst, _OrInst, thr_factory
from .restriction import Restriction

SUPPORTED = {"AND", "OR", "NOT", "MOD", "GK"}


@dataclass(frozen=True)
class SymPlusCircuit:
    """AND gates (monomial masks, repeated for multiplicity) feeding sym(count)."""

    nvars: int
    and_gates: tuple[int, ...]
    sym: tuple[int, ...]

    def __post_init__(self):
        if len(self.sym) != len(self.and_gates) + 1:
            raise InputError("sym needs one entry per possible count 0..len(and_gates)")
        if any(g < 0 or g >> self.nvars for g in self.and_gates):
            raise InputError("monomial uses a variable outside 1..n")

    @property
    def size(self) -> int:
        return len(self.and_gates)


def symplus_eval_all(s: SymPlusCircuit) -> np.ndarray:
    """Output on all 2^n points: count satisfied ANDs by a zeta transform, then apply sym."""
    check_vars(s.nvars)
    counts = np.bincount(np.asarray(s.and_gates, dtype=np.int64), minlength=1 << s.nvars)
    counts = transforms.zeta(counts.astype(np.int64))
    return np.asarray(s.sym, dtype=bool)[counts]


def symplus_eval_naive(s: SymPlusCircuit, x: int) -> int:
    return s.sym[sum((g & x) == g for g in s.and_gates)]


# collapse ------------------------------------------------------------------------

@dataclass
class _ExactAnd(_Inst):
    """AND over inputs and negated inputs: already a single product, kept exact."""

    q: int
    deterministic = True

    def degree(self):
        return 0

    def apply(self, params, ins):
        return np.prod(ins, axis=0) % self.q if len(ins) else np.ones(ins.shape[1:], np.int64)


def _literal_and(c: Circuit, nd: Node) -> bool:
    n = c.ninputs
    for r in nd.inputs:
        if r >= n:
            sub = c.nodes[r - n]
            if sub.kind.name != "NOT" or sub.inputs[0] >= n:
                return False
    return nd.kind.name == "AND"


def _check(c: Circuit, q: int):
    if len(c.outputs) != 1:
        raise InputError("expected a single-output circuit")
    bad = c.kinds() - SUPPORTED
    if bad:
        raise UnsupportedInputError(f"gate kinds {sorted(bad)} are not handled")
    for m in c.moduli():
        if m != q:
            raise UnsupportedInputError(f"MOD_{m} present; only the single prime modulus {q} is handled")


def collapse_plan(c: Circuit, q: int, point_error: float = 1 / 3) -> list[_Inst]:
    """Per-gate instantiations sharing the budget point_error / size."""
    q = require_prime(q)
    _check(c, q)
    eps = point_error / max(1, c.size)
    thr = thr_factory("detector")
    return [_ExactAnd(q) if _literal_and(c, nd) else _instantiate(nd.kind, len(nd.inputs), q, eps, thr)
            for nd in c.nodes]


def _top(c: Circuit):
    """(reference under any top NOT chain, negated?)"""
    r, neg, n = c.outputs[0], False, c.ninputs
    while r >= n and c.nodes[r - n].kind.name == "NOT":
        r, neg = c.nodes[r - n].inputs[0], not neg
    return r, neg


def _gate_tables(c: Circuit, plan, seed: int, q: int, upto: int) -> list[np.ndarray]:
    n = c.ninputs
    ins = transforms.input_columns(n)
    N = 1 << n
    zero, one = np.zeros(N, np.int64), np.ones(N, np.int64)
    vals = list(ins)
    gen = rng(seed)

    def get(r):
        return zero if r == CONST0 else one if r == CONST1 else vals[r]

    for nd, inst in zip(c.nodes[:upto], plan[:upto]):
        params = inst.draw(gen)
        stack = np.stack([get(r) for r in nd.inputs]) if nd.inputs else np.zeros((0, N), np.int64)
        vals.append(inst.apply(params, stack))
    return vals


def collapse_to_symplus(c: Circuit, q: int, seed: int, point_error: float = 1 / 3,
                        cap: int = 1 << 24) -> SymPlusCircuit:
    """Equivalent SYM+ circuit for the randomness drawn from ``seed``.

    Every gate draws from one tape in topological order. When the top gate is
    MOD_q its inner sum becomes the AND layer, so a circuit that is already
    MOD_q of ANDs consumes no randomness.
    """
    plan = collapse_plan(c, q, point_error)
    n = c.ninputs
    check_vars(n)
    r, neg = _top(c)
    if r < n:
        if r == CONST0 or r == CONST1:
            return SymPlusCircuit(n, (), (int((r == CONST1) != neg),))
        return SymPlusCircuit(n, (1 << r,), (int(neg), int(not neg)))
    top = c.nodes[r - n]
    if top.kind.name == "MOD":
        vals = _gate_tables(c, plan, seed, q, r - n)
        get = lambda x: np.zeros(1 << n, np.int64) if x == CONST0 else np.ones(1 << n, np.int64) if x == CONST1 else vals[x]
        inner = sum((get(x) for x in top.inputs), np.zeros(1 << n, np.int64)) % q
        hit = lambda cnt: cnt % q != 0
    else:
        vals = _gate_tables(c, plan, seed, q, r - n + 1)
        inner = vals[r]
        hit = lambda cnt: cnt % q == 1
    coeffs = transforms.mobius(inner, q)
    total = int(coeffs.sum())
    if total > cap:
        raise ResourceError(f"{total} AND gates exceed cap {cap}")
    gates = np.repeat(np.arange(1 << n, dtype=np.int64), coeffs)
    sym = tuple(int(hit(cnt) != neg) for cnt in range(total + 1))
    return SymPlusCircuit(n, tuple(int(g) for g in gates), sym)


def randomized_eval(c: Circuit, q: int, seed: int, x: int, point_error: float = 1 / 3) -> int:
    """Per-point scalar evaluation of the randomized circuit behind :func:`collapse_to_symplus`."""
    plan = collapse_plan(c, q, point_error)
    n = c.ninputs
    gen = rng(seed)
    vals = [(x >> i) & 1 for i in range(n)]

    def get(r):
        return 0 if r == CONST0 else 1 if r == CONST1 else vals[r]

    for nd, inst in zip(c.nodes, plan):
        params = inst.draw(gen)
        v = [get(r) for r in nd.inputs]
        if isinstance(inst, _ExactAnd):
            out = int(all(v))
        elif isinstance(inst, _NotInst):
            out = 1 - v[0]
        elif isinstance(inst, _ModInst):
            out = int(sum(v) % q != 0)
        elif isinstance(inst, _OrInst):
            w = [1 - b for b in v] if inst.negate else v
            hit = any(sum(int(a) * b for a, b in zip(row, w)) % q for row in params)
            out = int(hit) if not inst.negate else 1 - int(hit)
        elif isinstance(inst, _GkInst):
            mask = sum(b << i for i, b in enumerate(v))
            p = int(poly_eval(inst.poly, v))
            if not inst.deterministic:
                lay, w = params
                alive = lay.alive(w)
                isolated = False
                for cp in range(w.shape[0]):
                    for lvl in range(lay.m + 1):
                        cnt = sum(1 for s, a in zip(lay.sets, alive[cp, lvl]) if a and (s & mask) == s)
                        isolated |= cnt % q == 1
                p = 0 if isolated else p
            out = int((p + inst.kind.default) % q != 0)
        else:
            raise UnsupportedInputError(type(inst).__name__)
        vals.append(out)
    return get(c.outputs[0])


# SAT -----------------------------------------------------------------------------

@dataclass(frozen=True)
class SatReport:
    verdict: str                 # SAT | UNSAT | UNKNOWN
    witness: str | None          # x1 first
    repeats: int
    residual_bound: float
    params: dict = field(default_factory=dict)
    timing: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"verdict": self.verdict, "witness": self.witness, "repeats": self.repeats,
                "residual_bound": self.residual_bound, "params": self.params, "timing": self.timing}


def _bits(x: int, n: int) -> str:
    return "".join(str((x >> i) & 1) for i in range(n))


def brute_force_sat(c: Circuit) -> SatReport:
    t0 = time.perf_counter()
    tt = truth_table(c)
    hits = np.flatnonzero(tt.bits)
    dt = {"seconds": time.perf_counter() - t0}
    if len(hits):
        return SatReport("SAT", _bits(int(hits[0]), c.ninputs), 0, 0.0, {"method": "exhaustive"}, dt)
    return SatReport("UNSAT", None, 0, 0.0, {"method": "exhaustive"}, dt)


def split_or(c: Circuit, ell: int) -> Circuit:
    """OR over all 2^ell settings of x1..x_ell of the restricted copies; inputs are x_{ell+1}..x_n."""
    n = c.ninputs
    if not 0 <= ell <= n:
        raise InputError(f"ell must lie in 0..{n}")
    m = n - ell
    b = CircuitBuilder(m, f"{c.name}_split{ell}")
    outs = []
    for a in range(1 << ell):
        rho = Restriction(tuple((a >> i) & 1 for i in range(ell)) + (None,) * m)
        part = fold_constants(restrict(c, rho))
        ref = {}
        look = lambda r: r if r < m else ref[r]
        for j, nd in enumerate(part.nodes):
            ref[m + j] = b.add(nd.kind, [look(r) for r in nd.inputs])
        outs.append(look(part.outputs[0]))
    top = b.add(OR, outs)
    return fold_constants(b.build([top]))


def gc_sat(c: Circuit, ell: int | None = None, repeats: int = 15, seed: int = 0, q: int | None = None,
           point_error: float = 0.05, residual_target: float = 1e-3) -> SatReport:
    """Decide satisfiability by majority votes over SYM+ evaluations of the split circuit.

    SAT answers carry a witness checked on ``c`` directly. UNSAT answers carry a
    bound on the chance that a satisfying suffix was outvoted at every repeat.
    """
    t0 = time.perf_counter()
    if len(c.outputs) != 1:
        raise InputError("expected a single-output circuit")
    n = c.ninputs
    if ell is None:
        ell = -(-n // 4)
    if q is None:
        mods = c.moduli()
        if len(mods) > 1:
            raise UnsupportedInputError(f"several moduli {sorted(mods)}; one prime modulus is handled")
        q = mods.pop() if mods else 2
    q = require_prime(q)
    if repeats < 1:
        raise InputError("repeats must be positive")
    m = n - ell
    check_vars(m)
    params = {"n": n, "ell": ell, "repeats": repeats, "seed": seed, "q": q, "point_error": point_error,
              "residual_target": residual_target}
    split = split_or(c, ell)
    t1 = time.perf_counter()
    votes = np.zeros(1 << m, dtype=np.int64)
    for rep in range(repeats):
        s = collapse_to_symplus(split, q, derive_seed(seed, rep), point_error)
        votes += symplus_eval_all(s)
    t2 = time.perf_counter()
    majority = np.flatnonzero(2 * votes > repeats)
    others = np.flatnonzero((votes > 0) & (2 * votes <= repeats))
    prefixes = np.arange(1 << ell, dtype=np.int64)
    checked = 0
    witness = None
    for y in np.concatenate([majority, others]):
        full = prefixes | (int(y) << ell)
        cols = (full[None, :] >> np.arange(n)[:, None]) & 1
        hit = np.flatnonzero(evaluate_columns(c, cols)[0])
        checked += 1
        if len(hit):
            x = int(full[hit[0]])
            if evaluate(c, x) != (1,):
                raise AssertionError("witness failed direct evaluation")
            witness = _bits(x, n)
            break
    t3 = time.perf_counter()
    timing = {"split": t1 - t0, "collapse_eval": t2 - t1, "decode": t3 - t2}
    if witness is not None:
        return SatReport("SAT", witness, repeats, 0.0, params, timing)
    unverified = (1 << m) - checked
    miss = float(binom.sf(-(-repeats // 2) - 1, repeats, point_error))
    bound = unverified * miss
    verdict = "UNSAT" if bound <= residual_target else "UNKNOWN"
    return SatReport(verdict, None, repeats, bound, params, timing)

