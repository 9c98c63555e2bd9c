"""Random restrictions, exact decision-tree depth, common trees and Fourier level masses."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import transforms
from ._util import check_vars, rng, wilson_interval
from .circuit import Circuit, TruthTable, truth_tables
from .errors import InputError, ResourceError
from .restriction import Restriction

DT_MAX_VARS = 14
_FAR = 100  # "depth not yet known" marker in the int8 tables


def sample_restriction(n: int, p: float, seed: int, *key: int) -> Restriction:
    """Each variable free with probability p, otherwise a uniform bit."""
    if not 0 < p <= 1:
        raise InputError(f"p must lie in (0, 1], got {p}")
    gen = rng(seed, *key)
    free = gen.random(n) < p
    bits = gen.integers(0, 2, size=n)
    return Restriction(tuple(None if f else int(b) for f, b in zip(free, bits)))


# exact decision-tree depth ---------------------------------------------------------

def _cube_tables(f: TruthTable):
    """Depth of f restricted to every subcube, axis i standing for x_{i+1} (2 = free).

    Entries at or above _FAR are subcubes not needed for the full cube.
    """
    n = f.nvars
    if n > DT_MAX_VARS:
        raise ResourceError(f"{n} variables exceed the decision-tree cap {DT_MAX_VARS}")
    t = f.bits.reshape((2,) * n).transpose(tuple(range(n - 1, -1, -1))) if n else f.bits.reshape(())
    lo, hi = t.copy(), t.copy()
    for ax in range(n):
        a0, a1 = np.take(lo, 0, axis=ax), np.take(lo, 1, axis=ax)
        lo = np.stack([a0, a1, a0 & a1], axis=ax)
        b0, b1 = np.take(hi, 0, axis=ax), np.take(hi, 1, axis=ax)
        hi = np.stack([b0, b1, b0 | b1], axis=ax)
    depth = np.where(lo == hi, 0, _FAR).astype(np.int8)
    full = (2,) * n
    while depth[full] >= _FAR:
        new = depth.copy()
        for ax in range(n):
            d0, d1 = np.take(depth, 0, axis=ax), np.take(depth, 1, axis=ax)
            cand = np.minimum(np.maximum(d0, d1) + 1, _FAR).astype(np.int8)
            idx = [slice(None)] * n
            idx[ax] = 2
            new[tuple(idx)] = np.minimum(new[tuple(idx)], cand)
        if np.array_equal(new, depth):
            raise AssertionError("depth recursion stalled")
        depth = new
    return depth


def min_dt_depth(f: TruthTable) -> int:
    """Least depth of a decision tree computing f."""
    if f.is_constant():
        return 0
    return int(_cube_tables(f)[(2,) * f.nvars])


@dataclass(frozen=True)
class DecisionTree:
    """Either a leaf (var None, ``leaf`` its label) or a query of x_{var+1}."""

    var: int | None = None
    zero: "DecisionTree | None" = None
    one: "DecisionTree | None" = None
    leaf: object = None

    @property
    def depth(self) -> int:
        if self.var is None:
            return 0
        return 1 + max(self.zero.depth, self.one.depth)

    def evaluate(self, x: int):
        node = self
        while node.var is not None:
            node = node.one if (x >> node.var) & 1 else node.zero
        return node.leaf

    def table(self, n: int) -> np.ndarray:
        """Leaf labels (bits) on all 2^n points."""
        idx = np.arange(1 << n, dtype=np.int64)
        out = np.zeros(1 << n, dtype=bool)

        def walk(node, mask):
            if node.var is None:
                out[mask] = bool(node.leaf)
                return
            bit = ((idx >> node.var) & 1).astype(bool)
            walk(node.zero, mask & ~bit)
            walk(node.one, mask & bit)

        walk(self, np.ones(1 << n, dtype=bool))
        return out

    def paths_ok(self, seen=()) -> bool:
        if self.var is None:
            return True
        if self.var in seen:
            return False
        return self.zero.paths_ok(seen + (self.var,)) and self.one.paths_ok(seen + (self.var,))


def optimal_tree(f: TruthTable, varmap: Sequence[int] | None = None) -> DecisionTree:
    """A minimum-depth tree; ``varmap`` renames variable i of f to varmap[i]."""
    n = f.nvars
    varmap = list(range(n)) if varmap is None else list(varmap)
    if f.is_constant():
        return DecisionTree(leaf=int(f.bits[0]))
    depth = _cube_tables(f)

    def build(pat):
        d = int(depth[pat])
        if d == 0:
            i = tuple(0 if v == 2 else v for v in pat)
            t = f.bits.reshape((2,) * n).transpose(tuple(range(n - 1, -1, -1)))
            return DecisionTree(leaf=int(t[i]))
        for ax in range(n):
            if pat[ax] != 2:
                continue
            p0, p1 = pat[:ax] + (0,) + pat[ax + 1:], pat[:ax] + (1,) + pat[ax + 1:]
            if max(depth[p0], depth[p1]) + 1 == d:
                return DecisionTree(varmap[ax], build(p0), build(p1))
        raise AssertionError("no variable realises the recorded depth")

    return build((2,) * n)


# common trees ----------------------------------------------------------------------

@dataclass(frozen=True)
class Membership:
    verdict: str                  # YES | UNKNOWN
    tree: DecisionTree | None     # common tree; leaves hold one tree per output
    certified: bool = False


def _restricted(f: TruthTable, fixed: dict) -> tuple[TruthTable, list[int]]:
    rho = Restriction(tuple(fixed.get(i) for i in range(f.nvars)))
    return f.restrict(rho), list(rho.free_vars)


def common_dt_membership(fs: Sequence[TruthTable], t: int, r: int) -> Membership:
    """Sufficient test for membership in DT(t) o DT(r)^m.

    A common tree of depth <= t is grown greedily, each query chosen to
    minimise the worst residual depth over outputs and branches. YES answers
    are certified by evaluating the assembled trees on every input.
    """
    if not fs:
        return Membership("YES", DecisionTree(leaf=()), True)
    n = fs[0].nvars
    if any(f.nvars != n for f in fs):
        raise InputError("all outputs must share the input count")
    check_vars(n)

    def worst(fixed):
        return max(min_dt_depth(_restricted(f, fixed)[0]) for f in fs)

    def grow(fixed, budget):
        if worst(fixed) <= r:
            leaves = []
            for f in fs:
                sub, free = _restricted(f, fixed)
                leaves.append(optimal_tree(sub, free))
            return DecisionTree(leaf=tuple(leaves))
        if budget == 0:
            return None
        free = [i for i in range(n) if i not in fixed]
        best = min(free, key=lambda v: (max(worst({**fixed, v: 0}), worst({**fixed, v: 1})), v))
        zero = grow({**fixed, best: 0}, budget - 1)
        if zero is None:
            return None
        one = grow({**fixed, best: 1}, budget - 1)
        if one is None:
            return None
        return DecisionTree(best, zero, one)

    tree = grow({}, t)
    if tree is None:
        return Membership("UNKNOWN", None)
    ok = tree.paths_ok() and _certify(tree, fs, n, r)
    if not ok:
        raise AssertionError("greedy common tree failed its certification")
    return Membership("YES", tree, True)


def _certify(tree: DecisionTree, fs, n: int, r: int) -> bool:
    idx = np.arange(1 << n)
    for j, f in enumerate(fs):
        vals = np.array([tree.evaluate(int(x))[j].evaluate(int(x)) for x in idx], dtype=bool)
        if not np.array_equal(vals, f.bits):
            return False

    def leaves(node, path):
        if node.var is None:
            return all(sub.depth <= r and sub.paths_ok(path) for sub in node.leaf)
        return leaves(node.zero, path + (node.var,)) and leaves(node.one, path + (node.var,))

    return leaves(tree, ())


# switching experiments ------------------------------------------------------------

def syntactic_bound(p: float, depth: int, t: int) -> float:
    """(2 e p l / t)^t for a depth-l tree, capped at 1."""
    if t <= 0:
        return 1.0
    return min(1.0, (2 * math.e * p * depth / t) ** t)


def multiswitch_bound(p: float, t: int, r: int, k: int, m: int, w: int) -> float | None:
    """4 (64 (2^k m)^(1/r) p w)^t, capped at 1; undefined for r = 0."""
    if r <= 0:
        return None
    if t <= 0:
        return 1.0
    return min(1.0, 4 * (64 * (2 ** k * m) ** (1 / r) * p * w) ** t)


def single_clause_depth_prob(p: float, w: int, t: int) -> float:
    """Exact Pr[a width-w AND of distinct literals keeps depth >= t] under R_p."""
    if t <= 0:
        return 1.0
    half = (1 - p) / 2
    return float(sum(math.comb(w, j) * p ** j * half ** (w - j) for j in range(t, w + 1)))


def _bottom_width(c: Circuit) -> int:
    n = c.ninputs
    reads_inputs = [len(nd.inputs) for nd in c.nodes
                    if nd.kind.name != "NOT" and any(0 <= r < n for r in nd.inputs)]
    return max(reads_inputs, default=1)


def _max_k(c: Circuit) -> int:
    return max((nd.kind.k for nd in c.nodes if nd.kind.name == "GK"), default=0)


@dataclass
class SwitchReport:
    circuit: str
    t: int
    r: int
    trials: int
    seed: int
    rows: list = field(default_factory=list)    # one dict per p
    per_trial: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "CONSISTENT" if all(row["verdict"] == "CONSISTENT" for row in self.rows) else "INCONCLUSIVE"

    def to_json(self) -> dict:
        return {"circuit": self.circuit, "t": self.t, "r": self.r, "trials": self.trials, "seed": self.seed,
                "rows": self.rows, "verdict": self.verdict,
                "constants_note": "multiswitch and width-form bounds are consistency checks, not theorem tests"}


def switching_experiment(c: Circuit, ps: Sequence[float], t: int, r: int, trials: int, seed: int = 0,
                         keep_trials: bool = False) -> SwitchReport:
    """Monte-Carlo over R_p for each p.

    Per trial two events are recorded: some output keeps decision-tree depth
    >= t (compared with the syntactic bound, l = exact depth of the output),
    and the greedy common tree fails to certify DT(t-1) o DT(r)^m (compared
    with the multi-switching form).
    """
    fs = truth_tables(c)
    n, m = c.ninputs, len(fs)
    base_depth = max(min_dt_depth(f) for f in fs)
    k, w = _max_k(c), _bottom_width(c)
    rep = SwitchReport(c.name, t, r, trials, seed)
    for pi, p in enumerate(ps):
        deep = fail = 0
        for trial in range(trials):
            rho = sample_restriction(n, p, seed, pi, trial)
            sub = [f.restrict(rho) for f in fs]
            d = max(min_dt_depth(g) for g in sub)
            is_deep = d >= t
            if d <= r:
                ok = True                  # a depth-0 common tree suffices
            elif t == 0:
                ok = False
            else:
                ok = common_dt_membership(sub, t - 1, r).verdict == "YES"
            deep += is_deep
            fail += not ok
            if keep_trials:
                rep.per_trial.append({"p": p, "trial": trial, "free": len(rho.free_vars),
                                      "max_depth": d, "deep": int(is_deep), "common_fail": int(not ok)})
        syn = syntactic_bound(p, base_depth, t)
        msw = multiswitch_bound(p, t, r, k, m, w)
        sig_deep = math.sqrt(max(syn * (1 - syn), 1e-12) / trials)
        lo_d, hi_d = wilson_interval(deep, trials)
        lo_f, hi_f = wilson_interval(fail, trials)
        ok_deep = deep / trials <= syn + 3 * sig_deep
        ok_fail = msw is None or fail / trials <= msw + 3 * math.sqrt(max(msw * (1 - msw), 1e-12) / trials)
        rep.rows.append({
            "p": p, "deep_freq": deep / trials, "deep_ci99": [float(lo_d), float(hi_d)],
            "common_fail_freq": fail / trials, "common_fail_ci99": [float(lo_f), float(hi_f)],
            "syntactic_bound": syn, "tree_depth": base_depth, "multiswitch_bound": msw,
            "width_form_bound": min(1.0, (p * w) ** t), "k": k, "outputs": m, "bottom_width": w,
            "verdict": "CONSISTENT" if ok_deep and ok_fail else "INCONCLUSIVE"})
    return rep


# Fourier --------------------------------------------------------------------------

def fourier_coefficients(f: TruthTable) -> np.ndarray:
    """f^(S) = E[(-1)^f(x) chi_S(x)], indexed by the mask of S."""
    if f.nvars > 22:
        raise ResourceError("Fourier transform limited to 22 variables")
    return transforms.walsh_hadamard(f.pm1()) / (1 << f.nvars)


def fourier_level_mass(f: TruthTable, level: int, coeffs: np.ndarray | None = None) -> float:
    """Sum of |f^(S)| over |S| = level."""
    c = fourier_coefficients(f) if coeffs is None else coeffs
    return float(np.abs(c[transforms.popcounts(f.nvars) == level]).sum())


def level_masses(f: TruthTable) -> list[float]:
    c = fourier_coefficients(f)
    w = transforms.popcounts(f.nvars)
    return [float(np.abs(c[w == lv]).sum()) for lv in range(f.nvars + 1)]


def growth_bound_shape(k: int, size: int, depth: int, level: int) -> float:
    """(k (k + log2 m)^(d-1))^level with both universal constants set to 1."""
    return float((max(k, 1) * (max(k, 1) + math.log2(max(size, 2))) ** max(depth - 1, 0)) ** level)
