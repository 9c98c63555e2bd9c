"""Probabilistic polynomials over F_q for gates and whole circuits.

A sample is held as its value table on {0,1}^n: products of multilinear
polynomials are then pointwise, and :meth:`ProbPolySampler.sample`
recovers the coefficients by Moebius inversion.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from . import transforms
from ._util import check_vars, reps_for, require_prime, rng, wilson_interval
from .algebra import FieldPoly, interpolate_ball, poly_pow_fermat
from .ball import ball_points, ball_size
from .circuit import (CONST0, CONST1, Circuit, GateKind, TruthTable, gate_columns,
                      single_gate, truth_table)
from .depthred import DetectorThr, _fermat, detector_values
from .errors import InputError, ResourceError, UnsupportedInputError


class ThrSource(Protocol):
    """Supplier of probabilistic polynomials for [weight > k]."""

    k: int
    one_sided: bool

    @property
    def error(self) -> float: ...

    def degree_bound(self, fanin: int) -> int: ...

    def draw(self, gen: np.random.Generator, fanin: int): ...

    def apply(self, params, ins: np.ndarray, q: int) -> np.ndarray: ...


@dataclass(frozen=True)
class ExactThr:
    """Deterministic full-degree interpolant of THR^k; a correctness baseline."""

    k: int
    one_sided: bool = True
    error: float = 0.0

    def degree_bound(self, fanin: int) -> int:
        return fanin

    def draw(self, gen, fanin: int):
        return fanin

    def apply(self, fanin, ins: np.ndarray, q: int) -> np.ndarray:
        weights = transforms.popcounts(fanin)
        poly = FieldPoly.from_table(q, (weights > self.k).astype(np.int64))
        return _poly_on(poly, ins)


def _poly_on(p: FieldPoly, ins: np.ndarray) -> np.ndarray:
    """Evaluate p with x_i replaced by the value rows ins[i] (values mod q)."""
    out = np.zeros(ins.shape[1:], dtype=np.int64)
    for m, c in p.terms.items():
        term = np.full(ins.shape[1:], c, dtype=np.int64)
        i = 0
        while m:
            if m & 1:
                term = term * ins[i] % p.q
            m >>= 1
            i += 1
        out = (out + term) % p.q
    return out


def thr_factory(name: str) -> Callable[[int, float], ThrSource]:
    if name == "detector":
        return lambda k, eps: DetectorThr(k, eps)
    if name == "exact":
        return lambda k, eps: ExactThr(k)
    raise InputError(f"unknown threshold source {name!r} (detector|exact)")


# gate instantiations -----------------------------------------------------------
# Each one draws its randomness once and can then be applied to any input
# tables, which is what the composition-soundness instrumentation needs.

class _Inst:
    deterministic = False

    def degree(self) -> int:
        raise NotImplementedError

    def draw(self, gen):
        return None

    def apply(self, params, ins: np.ndarray) -> np.ndarray:
        raise NotImplementedError


@dataclass
class _NotInst(_Inst):
    q: int
    deterministic = True

    def degree(self):
        return 1

    def apply(self, params, ins):
        return (1 - ins[0]) % self.q


@dataclass
class _ModInst(_Inst):
    q: int
    deterministic = True

    def degree(self):
        return self.q - 1

    def apply(self, params, ins):
        return _fermat(ins.sum(axis=0) % self.q, self.q)


@dataclass
class _OrInst(_Inst):
    """1 - prod_j (1 - (sum_i r_ji x_i)^(q-1)); with ``negate`` it is the AND of the inputs."""

    q: int
    fanin: int
    eps: float
    negate: bool = False

    @property
    def t(self) -> int:
        return reps_for(self.q, self.eps)

    def degree(self):
        return self.t * (self.q - 1)

    def draw(self, gen):
        return gen.integers(0, self.q, size=(self.t, self.fanin), dtype=np.int64)

    def apply(self, r, ins):
        q = self.q
        if self.negate:
            ins = (1 - ins) % q
        forms = np.tensordot(r, ins, axes=(1, 0)) % q if self.fanin else np.zeros((len(r),) + ins.shape[1:], np.int64)
        miss = np.prod((1 - _fermat(forms, q)) % q, axis=0) % q
        out = (1 - miss) % q
        return (1 - out) % q if self.negate else out


@dataclass
class _GkInst(_Inst):
    """(p (1 - Q) + c)^(q-1) with p interpolating f - c on the ball."""

    q: int
    kind: GateKind
    fanin: int
    thr: ThrSource
    poly: FieldPoly = field(init=False)

    def __post_init__(self):
        q, k, f = self.q, self.kind.k, self.fanin
        c = self.kind.default
        truth = {p: (v - c) % q for p, v in zip(ball_points(f, k), self.kind.table)}
        self.poly = interpolate_ball(truth, f, k, q)

    @property
    def deterministic(self):
        return self.kind.k >= self.fanin

    def degree(self):
        if self.deterministic:
            return self.q - 1
        return (self.q - 1) * (min(self.kind.k, self.fanin) + self.thr.degree_bound(self.fanin))

    def draw(self, gen):
        return None if self.deterministic else self.thr.draw(gen, self.fanin)

    def apply(self, params, ins):
        q = self.q
        p = _poly_on(self.poly, ins)
        if not self.deterministic:
            p = p * (1 - self.thr.apply(params, ins, q)) % q
        return _fermat((p + self.kind.default) % q, q)


def _instantiate(kind: GateKind, fanin: int, q: int, eps: float, thr) -> _Inst:
    nm = kind.name
    if nm == "NOT":
        return _NotInst(q)
    if nm == "MOD":
        if kind.m != q:
            raise UnsupportedInputError(f"MOD_{kind.m} gate in a circuit handled over F_{q}")
        return _ModInst(q)
    if nm in ("OR", "AND"):
        return _OrInst(q, fanin, eps, negate=nm == "AND")
    if nm == "GK":
        return _GkInst(q, kind, fanin, thr(kind.k, eps))
    raise UnsupportedInputError(f"{nm} gates are not handled (AND/OR/NOT/MOD_q/GK only)")


# samplers ----------------------------------------------------------------------

@dataclass(frozen=True)
class ProbPolySampler:
    """Seedable distribution over proper polynomials in ``nvars`` variables."""

    target: str
    nvars: int
    q: int
    eps: float
    degree_bound: int
    draw: Callable[[np.random.Generator], np.ndarray] = field(repr=False)
    reference: TruthTable | None = field(default=None, repr=False)
    draw_batch: Callable[[list], np.ndarray] | None = field(default=None, repr=False)

    def table(self, seed: int) -> np.ndarray:
        """Values of the sample drawn with ``seed`` on all 2^n points."""
        return self.draw(rng(seed))

    def tables(self, gens: Sequence[np.random.Generator]) -> np.ndarray:
        if self.draw_batch is not None:
            return self.draw_batch(list(gens))
        return np.stack([self.draw(g) for g in gens])

    def sample(self, seed: int) -> FieldPoly:
        return FieldPoly.from_table(self.q, self.table(seed))


def or_poly_sampler(n: int, q: int, eps: float) -> ProbPolySampler:
    q = require_prime(q)
    check_vars(n)
    inst = _OrInst(q, n, eps)
    ins = transforms.input_columns(n)
    ref = TruthTable(n, transforms.popcounts(n) > 0)
    return ProbPolySampler(f"OR_{n}", n, q, eps, min(n, inst.degree()),
                           lambda g: inst.apply(inst.draw(g), ins), ref)


def gk_poly_sampler(kind: GateKind, n: int, q: int, eps: float,
                    thr: ThrSource | str = "detector") -> ProbPolySampler:
    """Sampler for one G(k) gate reading x1..xn."""
    q = require_prime(q)
    check_vars(n)
    if isinstance(thr, str):
        thr = thr_factory(thr)(kind.k, eps)
    if thr.error > eps + 1e-12:
        raise InputError(f"threshold source error {thr.error} exceeds budget {eps}")
    inst = _GkInst(q, kind, n, thr)
    ins = transforms.input_columns(n)
    ref = truth_table(single_gate(kind, n))

    def batch(gens):
        if inst.deterministic or not isinstance(thr, DetectorThr):
            return np.stack([inst.apply(inst.draw(g), ins) for g in gens])
        params = [inst.draw(g) for g in gens]
        lay = params[0][0]
        w = np.stack([pr[1] for pr in params])   # (B, copies, m, m)
        chunk = max(1, (1 << 22) // max(1, thr.copies * (lay.m + 1) << n))
        c1 = _poly_on(inst.poly, ins)
        outs = []
        for i in range(0, len(gens), chunk):
            det = detector_values(lay, ins, w[i:i + chunk], q)   # C2' = 1 - Q
            outs.append(_fermat((c1[None, :] * det + kind.default) % q, q))
        return np.concatenate(outs)

    return ProbPolySampler(f"GK(k={kind.k},default={kind.default}) over {n}", n, q, eps,
                           min(n, inst.degree()), lambda g: inst.apply(inst.draw(g), ins), ref, batch)


def gk_poly_symbolic(kind: GateKind, n: int, q: int, eps: float, seed: int) -> FieldPoly:
    """Same sample as ``gk_poly_sampler(...).sample(seed)`` via explicit polynomial algebra."""
    thr = DetectorThr(kind.k, eps)
    c = kind.default
    p = interpolate_ball({pt: (v - c) % q for pt, v in zip(ball_points(n, kind.k), kind.table)}, n, kind.k, q)
    if kind.k >= n:
        return poly_pow_fermat(p + c)
    lay, w = thr.draw(rng(seed), n)
    alive = lay.alive(w)
    survivor = FieldPoly.const(q, n, 1)
    for copy in range(w.shape[0]):
        for level in range(lay.m + 1):
            count = FieldPoly(q, n, {s: 1 for s, a in zip(lay.sets, alive[copy, level]) if a})
            survivor = survivor * poly_pow_fermat(count - 1)
    return poly_pow_fermat(p * survivor + c)


@dataclass(frozen=True)
class _Plan:
    insts: list
    budgets: list
    degree: int


def _plan(c: Circuit, q: int, eps: float, thr) -> _Plan:
    if len(c.outputs) != 1:
        raise InputError("expected a single-output circuit")
    for m in c.moduli():
        if m != q:
            raise UnsupportedInputError(f"MOD_{m} present; only MOD_{q} is supported over F_{q}")
    s = max(1, c.size)
    n = c.ninputs
    top = c.outputs[0] - n
    insts, budgets, deg = [], [], []
    for j, nd in enumerate(c.nodes):
        b = eps / 2 if j == top else eps / (2 * s)
        inst = _instantiate(nd.kind, len(nd.inputs), q, b, thr)
        insts.append(inst)
        budgets.append(0.0 if inst.deterministic else b)
        below = max((deg[r - n] if r >= n else (1 if r >= 0 else 0) for r in nd.inputs), default=0)
        deg.append(min(n, inst.degree() * below))
    out = c.outputs[0]
    return _Plan(insts, budgets, deg[out - n] if out >= n else (1 if out >= 0 else 0))


def _run(c: Circuit, plan: _Plan, gen, q: int, ins: np.ndarray, truth_nodes=None):
    n = c.ninputs
    N = ins.shape[1]
    zero, one = np.zeros(N, np.int64), np.ones(N, np.int64)
    vals = list(ins)
    ok = np.ones(N, bool)

    def get(r, src):
        return zero if r == CONST0 else one if r == CONST1 else src[r]

    for j, (nd, inst) in enumerate(zip(c.nodes, plan.insts)):
        params = inst.draw(gen)
        stack = np.stack([get(r, vals) for r in nd.inputs]) if nd.inputs else np.zeros((0, N), np.int64)
        vals.append(inst.apply(params, stack))
        if truth_nodes is not None:
            exact_in = np.stack([get(r, truth_nodes) for r in nd.inputs]) if nd.inputs else np.zeros((0, N), np.int64)
            ok &= inst.apply(params, exact_in) == truth_nodes[n + j]
    out = get(c.outputs[0], vals)
    return (out, ok) if truth_nodes is not None else out


def circuit_poly_sampler(c: Circuit, q: int, eps: float, thr: str | Callable = "detector") -> ProbPolySampler:
    """Compose gate samplers: budget eps/2 at the top gate and eps/(2 size) below."""
    q = require_prime(q)
    check_vars(c.ninputs)
    if isinstance(thr, str):
        thr = thr_factory(thr)
    plan = _plan(c, q, eps, thr)
    ins = transforms.input_columns(c.ninputs)
    return ProbPolySampler(c.name, c.ninputs, q, eps, plan.degree,
                           lambda g: _run(c, plan, g, q, ins), truth_table(c))


def instrumented_table(c: Circuit, q: int, eps: float, seed: int, thr: str = "detector"):
    """(sample values, mask of points where every gate sampler was correct on its true inputs)."""
    from .circuit import evaluate_columns
    plan = _plan(c, q, eps, thr_factory(thr))
    ins = transforms.input_columns(c.ninputs)
    exact = [*ins, *[v.astype(np.int64) for v in evaluate_columns(c, ins, all_nodes=True)]]
    return _run(c, plan, rng(seed), q, ins, exact)


# error estimation --------------------------------------------------------------

@dataclass(frozen=True)
class ErrorReport:
    target: str
    q: int
    eps: float
    seeds: int
    points: np.ndarray = field(repr=False)
    errors: np.ndarray = field(repr=False)
    upper: np.ndarray = field(repr=False)
    avg_agreement: float = 0.0

    @property
    def max_point_error(self) -> float:
        return float(self.errors.max()) if self.errors.size else 0.0

    @property
    def wilson_hi(self) -> float:
        return float(self.upper.max()) if self.upper.size else 0.0

    def to_json(self) -> dict:
        return {"target": self.target, "q": self.q, "eps": self.eps, "seeds": self.seeds,
                "max_point_error": self.max_point_error, "wilson_hi": self.wilson_hi,
                "avg_agreement": self.avg_agreement}


def _reference_bits(reference, n: int) -> np.ndarray:
    if isinstance(reference, TruthTable):
        return reference.bits
    if isinstance(reference, Circuit):
        return truth_table(reference).bits
    if isinstance(reference, GateKind):
        return truth_table(single_gate(reference, n)).bits
    raise InputError("reference must be a TruthTable, Circuit or GateKind")


def estimate_pointwise_error(s: ProbPolySampler, reference=None, trials: int = 1000,
                             points: str = "exhaustive", seed: int = 0, npoints: int = 256,
                             chunk: int = 256) -> ErrorReport:
    """Per-point Monte-Carlo error with Wilson 99% upper bounds.

    Sample t uses the stream ``rng(seed, t)``, so the report does not depend
    on chunking.
    """
    ref = _reference_bits(reference if reference is not None else s.reference, s.nvars).astype(np.int64)
    N = 1 << s.nvars
    if points == "exhaustive":
        pts = np.arange(N)
    elif points == "sampled":
        pts = np.sort(rng(seed, 1 << 40).choice(N, size=min(npoints, N), replace=False))
    else:
        raise InputError("points must be 'exhaustive' or 'sampled'")
    wrong = np.zeros(len(pts), dtype=np.int64)
    for start in range(0, trials, chunk):
        gens = [rng(seed, t) for t in range(start, min(trials, start + chunk))]
        tabs = s.tables(gens)
        wrong += (tabs[:, pts] != ref[pts]).sum(axis=0)
    _, hi = wilson_interval(wrong, trials)
    errs = wrong / trials
    return ErrorReport(s.target, s.q, s.eps, trials, pts, errs, hi, float(1 - errs.mean()))


# degree oracle -------------------------------------------------------------------

@dataclass(frozen=True)
class DegreeOracleResult:
    degree: int | None          # None: no degree <= dmax reaches the target error
    best_errors: tuple[float, ...]  # best achievable error at each degree tried


def min_prob_degree_oracle(f: TruthTable, dist, eps: float, q: int, dmax: int,
                           cap: int = 1 << 24, chunk: int = 1 << 16) -> DegreeOracleResult:
    """Least degree whose best polynomial errs with probability <= eps under ``dist``."""
    q = require_prime(q)
    n = f.nvars
    dist = np.asarray(dist, dtype=float)
    if dist.shape != (1 << n,) or np.any(dist < 0) or abs(dist.sum() - 1) > 1e-9:
        raise InputError("distribution must be a nonnegative vector of length 2^n summing to 1")
    if q ** ball_size(n, dmax) > cap:
        raise ResourceError(f"{q}^{ball_size(n, dmax)} polynomials exceed cap {cap}")
    target = f.bits.astype(np.int64)
    idx = np.arange(1 << n)
    best = []
    for d in range(dmax + 1):
        monos = [m for m in range(1 << n) if bin(m).count("1") <= d]
        evalm = ((idx[:, None] & np.array(monos)) == np.array(monos)).astype(np.int64)  # points x monos
        K, total = len(monos), q ** len(monos)
        low = np.inf
        powers = q ** np.arange(K, dtype=np.int64)
        for start in range(0, total, chunk):
            code = np.arange(start, min(total, start + chunk), dtype=np.int64)
            coef = (code[:, None] // powers) % q
            vals = coef @ evalm.T % q
            err = (vals != target) @ dist
            low = min(low, float(err.min()))
        best.append(low)
        if low <= eps + 1e-12:
            return DegreeOracleResult(d, tuple(best))
    return DegreeOracleResult(None, tuple(best))
