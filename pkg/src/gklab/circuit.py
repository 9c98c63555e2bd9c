"""Circuits of AND/OR/NOT/MOD/MAJ/THR/G(k)/SYM gates.

Node references are plain ints: ``0..n-1`` are the inputs x1..xn, ``n+j`` is
node j, and :data:`CONST0` / :data:`CONST1` are the constants.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import numpy as np

from ._util import check_vars
from .ball import ball_index, ball_index_array, ball_points, ball_size
from .errors import InputError, ResourceError
from .restriction import Restriction
from .transforms import popcounts

CONST0 = -1
CONST1 = -2

KINDS = ("AND", "OR", "NOT", "MOD", "MAJ", "THR", "GK", "SYM")


@dataclass(frozen=True)
class GateKind:
    name: str
    m: int | None = None
    k: int | None = None
    default: int | None = None
    table: tuple[int, ...] | None = None

    def __str__(self):
        extra = []
        if self.m is not None:
            extra.append(f"m={self.m}")
        if self.k is not None:
            extra.append(f"k={self.k}")
        if self.default is not None:
            extra.append(f"default={self.default}")
        return self.name + ("[" + ",".join(extra) + "]" if extra else "")


AND = GateKind("AND")
OR = GateKind("OR")
NOT = GateKind("NOT")
MAJ = GateKind("MAJ")


def MOD(m: int) -> GateKind:
    return GateKind("MOD", m=int(m))


def THR(k: int) -> GateKind:
    return GateKind("THR", k=int(k))


def GK(k: int, default: int, table: Sequence[int]) -> GateKind:
    """G(k) gate: ``table`` lists values on the radius-k ball in canonical order."""
    return GateKind("GK", k=int(k), default=int(default), table=tuple(int(b) for b in table))


def SYM(table: Sequence[int]) -> GateKind:
    return GateKind("SYM", table=tuple(int(b) for b in table))


def gk_from_function(fanin: int, k: int, default: int, f) -> GateKind:
    """GK gate whose ball values are ``f(mask)`` for each ball point."""
    return GK(k, default, [int(f(p)) & 1 for p in ball_points(fanin, k)])


@dataclass(frozen=True)
class Node:
    kind: GateKind
    inputs: tuple[int, ...]


@dataclass(frozen=True)
class Diagnostic:
    node: int | None
    message: str

    def __str__(self):
        where = "outputs" if self.node is None else f"node {self.node}"
        return f"{where}: {self.message}"


@dataclass(frozen=True)
class Circuit:
    ninputs: int
    nodes: tuple[Node, ...]
    outputs: tuple[int, ...]
    name: str = "c"

    def ref(self, j: int) -> int:
        """Reference of node j."""
        return self.ninputs + j

    @property
    def size(self) -> int:
        """Number of gates, NOT excluded."""
        return sum(nd.kind.name != "NOT" for nd in self.nodes)

    @property
    def depth(self) -> int:
        d = self.node_depths()
        return max((self._ref_depth(r, d) for r in self.outputs), default=0)

    def _ref_depth(self, r, d):
        return d[r - self.ninputs] if r >= self.ninputs else 0

    def node_depths(self) -> list[int]:
        """Longest path from the inputs to each node, NOT gates not counted."""
        d: list[int] = []
        for nd in self.nodes:
            below = max((self._ref_depth(r, d) for r in nd.inputs), default=0)
            d.append(below + (nd.kind.name != "NOT"))
        return d

    def moduli(self) -> set[int]:
        return {nd.kind.m for nd in self.nodes if nd.kind.name == "MOD"}

    def kinds(self) -> set[str]:
        return {nd.kind.name for nd in self.nodes}


class CircuitBuilder:
    """Incremental construction; every ``add`` returns the new node's reference."""

    def __init__(self, ninputs: int, name: str = "c"):
        self.ninputs = ninputs
        self.name = name
        self.nodes: list[Node] = []

    def x(self, i: int) -> int:
        if not 1 <= i <= self.ninputs:
            raise InputError(f"x{i} out of range")
        return i - 1

    @staticmethod
    def const(v: int) -> int:
        return CONST1 if v else CONST0

    def add(self, kind: GateKind, inputs: Sequence[int]) -> int:
        self.nodes.append(Node(kind, tuple(int(r) for r in inputs)))
        return self.ninputs + len(self.nodes) - 1

    def AND(self, *ins):
        return self.add(AND, ins)

    def OR(self, *ins):
        return self.add(OR, ins)

    def NOT(self, a):
        return self.add(NOT, (a,))

    def MOD(self, m, *ins):
        return self.add(MOD(m), ins)

    def build(self, outputs: Sequence[int], check: bool = True) -> Circuit:
        c = Circuit(self.ninputs, tuple(self.nodes), tuple(int(o) for o in outputs), self.name)
        if check:
            diags = validate(c)
            if diags:
                raise InputError("invalid circuit: " + "; ".join(map(str, diags[:5])))
        return c


def validate(c: Circuit) -> list[Diagnostic]:
    """Structural checks; an empty list means the circuit is well formed."""
    out: list[Diagnostic] = []
    n = c.ninputs
    for j, nd in enumerate(c.nodes):
        kd, f = nd.kind, len(nd.inputs)
        for r in nd.inputs:
            if r not in (CONST0, CONST1) and not 0 <= r < n + j:
                out.append(Diagnostic(j, f"reference {r} is not an input, constant or earlier node"))
        if kd.name not in KINDS:
            out.append(Diagnostic(j, f"unknown gate kind {kd.name!r}"))
        elif kd.name == "NOT" and f != 1:
            out.append(Diagnostic(j, f"NOT has fan-in {f}, expected 1"))
        elif kd.name == "MOD" and (kd.m is None or kd.m < 2):
            out.append(Diagnostic(j, f"MOD modulus {kd.m} must be >= 2"))
        elif kd.name == "THR" and (kd.k is None or kd.k < 0):
            out.append(Diagnostic(j, "THR radius must be >= 0"))
        elif kd.name == "GK":
            if kd.k is None or kd.k < 0:
                out.append(Diagnostic(j, "GK radius must be >= 0"))
            elif kd.table is None or len(kd.table) != ball_size(f, kd.k):
                got = None if kd.table is None else len(kd.table)
                out.append(Diagnostic(j, f"ball table length {got}, expected {ball_size(f, kd.k)}"))
            if kd.default not in (0, 1):
                out.append(Diagnostic(j, "GK default must be 0 or 1"))
        elif kd.name == "SYM":
            if kd.table is None or len(kd.table) != f + 1:
                out.append(Diagnostic(j, f"SYM table length must be fan-in + 1 = {f + 1}"))
        if kd.table is not None and any(b not in (0, 1) for b in kd.table):
            out.append(Diagnostic(j, "table entries must be bits"))
    for r in c.outputs:
        if r not in (CONST0, CONST1) and not 0 <= r < n + len(c.nodes):
            out.append(Diagnostic(None, f"output reference {r} out of range"))
    return out


# evaluation -----------------------------------------------------------------

def _gate_scalar(kind: GateKind, vals: list[int]) -> int:
    nm, s = kind.name, sum(vals)
    if nm == "AND":
        return int(s == len(vals))
    if nm == "OR":
        return int(s > 0)
    if nm == "NOT":
        return 1 - vals[0]
    if nm == "MOD":
        return int(s % kind.m != 0)
    if nm == "MAJ":
        return int(2 * s >= len(vals))
    if nm == "THR":
        return int(s > kind.k)
    if nm == "GK":
        if s > kind.k:
            return kind.default
        mask = sum(b << i for i, b in enumerate(vals))
        return kind.table[ball_index(mask, len(vals))]
    if nm == "SYM":
        return kind.table[s]
    raise InputError(f"unknown gate kind {nm}")


def _point_bits(x, n: int) -> list[int]:
    if isinstance(x, (int, np.integer)):
        return [(int(x) >> i) & 1 for i in range(n)]
    if isinstance(x, str):
        x = [int(ch) for ch in x]
    bits = [int(b) for b in x]
    if len(bits) != n:
        raise InputError(f"input has length {len(bits)}, circuit has {n} inputs")
    return bits


def evaluate(c: Circuit, x) -> tuple[int, ...]:
    """Output bits at one point (bit sequence with x1 first, bit string, or index)."""
    vals = _point_bits(x, c.ninputs)

    def get(r):
        if r == CONST0:
            return 0
        if r == CONST1:
            return 1
        return vals[r]

    for nd in c.nodes:
        vals.append(_gate_scalar(nd.kind, [get(r) for r in nd.inputs]))
    return tuple(get(r) for r in c.outputs)


def gate_columns(kind: GateKind, cols: np.ndarray) -> np.ndarray:
    """Gate applied pointwise to stacked 0/1 input columns of shape (f, ...)."""
    nm, f = kind.name, cols.shape[0]
    if nm == "AND":
        return np.all(cols, axis=0) if f else np.ones(cols.shape[1:], bool)
    if nm == "OR":
        return np.any(cols, axis=0)
    if nm == "NOT":
        return ~cols[0].astype(bool)
    s = cols.sum(axis=0, dtype=np.int64)
    if nm == "MOD":
        return s % kind.m != 0
    if nm == "MAJ":
        return 2 * s >= f
    if nm == "THR":
        return s > kind.k
    if nm == "SYM":
        return np.asarray(kind.table, dtype=bool)[s]
    if nm == "GK":
        w, idx = ball_index_array(cols)
        tab = np.asarray(kind.table, dtype=bool)
        inside = w <= kind.k
        return np.where(inside, tab[np.where(inside, idx, 0)], bool(kind.default))
    raise InputError(f"unknown gate kind {nm}")


def evaluate_columns(c: Circuit, cols: np.ndarray, all_nodes: bool = False):
    """Vectorised evaluation. ``cols`` has shape (n, N), row i holding x_{i+1}.

    Returns the (outputs, N) bool array, or the list of every node's column
    when ``all_nodes`` is set.
    """
    cols = np.asarray(cols).astype(bool)
    if cols.shape[0] != c.ninputs:
        raise InputError(f"expected {c.ninputs} input rows, got {cols.shape[0]}")
    shape = cols.shape[1:]
    zero, one = np.zeros(shape, bool), np.ones(shape, bool)
    vals = list(cols)

    def get(r):
        return zero if r == CONST0 else one if r == CONST1 else vals[r]

    for nd in c.nodes:
        ins = np.stack([get(r) for r in nd.inputs]) if nd.inputs else np.zeros((0,) + shape, bool)
        vals.append(gate_columns(nd.kind, ins))
    if all_nodes:
        return vals[c.ninputs:]
    return np.stack([get(r) for r in c.outputs]) if c.outputs else np.zeros((0,) + shape, bool)


@dataclass(frozen=True, eq=False)
class TruthTable:
    """f: {0,1}^n -> {0,1} as a bool vector indexed by sum x_i 2^(i-1)."""

    nvars: int
    bits: np.ndarray = field(repr=False)

    def __post_init__(self):
        b = np.asarray(self.bits).astype(bool)
        if b.shape != (1 << self.nvars,):
            raise InputError(f"truth table length {b.shape} does not match 2^{self.nvars}")
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    @classmethod
    def from_string(cls, s: str) -> "TruthTable":
        n = len(s).bit_length() - 1
        return cls(n, np.array([ch == "1" for ch in s]))

    @classmethod
    def from_function(cls, n: int, f) -> "TruthTable":
        return cls(n, np.array([bool(f(i)) for i in range(1 << n)]))

    def __eq__(self, o):
        return isinstance(o, TruthTable) and self.nvars == o.nvars and np.array_equal(self.bits, o.bits)

    def __hash__(self):
        return hash((self.nvars, self.bits.tobytes()))

    def __getitem__(self, x) -> int:
        return int(self.bits[x if isinstance(x, (int, np.integer)) else
                             sum(int(b) << i for i, b in enumerate(x))])

    def __str__(self):
        return "".join("1" if b else "0" for b in self.bits)

    def packed(self) -> bytes:
        return np.packbits(self.bits, bitorder="little").tobytes()

    def count(self) -> int:
        return int(self.bits.sum())

    def is_constant(self) -> bool:
        return bool(self.bits.all() or not self.bits.any())

    def pm1(self) -> np.ndarray:
        """(-1)^f(x) as floats."""
        return 1.0 - 2.0 * self.bits

    def restrict(self, rho: Restriction) -> "TruthTable":
        if rho.n != self.nvars:
            raise InputError("restriction length differs from table arity")
        free = rho.free_vars
        y = np.arange(1 << len(free), dtype=np.int64)
        idx = np.full(y.shape, rho.fixed_mask, dtype=np.int64)
        for j, v in enumerate(free):
            idx |= ((y >> j) & 1) << v
        return TruthTable(len(free), self.bits[idx])


CHUNK = 1 << 16


def truth_table(c: Circuit, output: int = 0, workers: int = 1) -> TruthTable:
    return truth_tables(c, workers)[output]


def truth_tables(c: Circuit, workers: int = 1) -> list[TruthTable]:
    """All outputs over all 2^n points, evaluated in chunks of 2^16 points."""
    n = c.ninputs
    check_vars(n)
    total = 1 << n
    starts = list(range(0, total, CHUNK))

    def run(start):
        idx = np.arange(start, min(total, start + CHUNK), dtype=np.int64)
        cols = (idx[None, :] >> np.arange(n)[:, None]) & 1
        return evaluate_columns(c, cols)

    if workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    full = np.concatenate(parts, axis=1)
    return [TruthTable(n, row) for row in full]


# structural transforms --------------------------------------------------------

def restrict(c: Circuit, rho: Restriction) -> Circuit:
    """Substitute the fixed variables by constants and renumber the free ones."""
    if rho.n != c.ninputs:
        raise InputError("restriction length differs from circuit inputs")
    n, free = c.ninputs, rho.free_vars
    newpos = {v: j for j, v in enumerate(free)}
    m = len(free)

    def remap(r):
        if r < 0:
            return r
        if r < n:
            v = rho.values[r]
            return newpos[r] if v is None else (CONST1 if v else CONST0)
        return r - n + m

    nodes = tuple(Node(nd.kind, tuple(remap(r) for r in nd.inputs)) for nd in c.nodes)
    return Circuit(m, nodes, tuple(remap(r) for r in c.outputs), c.name)


def prune(c: Circuit) -> Circuit:
    """Drop nodes that no output depends on."""
    n = c.ninputs
    live = [False] * len(c.nodes)
    stack = [r - n for r in c.outputs if r >= n]
    while stack:
        j = stack.pop()
        if live[j]:
            continue
        live[j] = True
        stack.extend(r - n for r in c.nodes[j].inputs if r >= n)
    newref, nodes = {}, []
    for j, nd in enumerate(c.nodes):
        if live[j]:
            newref[n + j] = n + len(nodes)
            nodes.append(Node(nd.kind, tuple(newref.get(r, r) for r in nd.inputs)))
    return Circuit(n, tuple(nodes), tuple(newref.get(r, r) for r in c.outputs), c.name)


def fold_constants(c: Circuit) -> Circuit:
    """Propagate constant inputs through AND/OR/NOT/MOD and fully constant gates.

    AND drops 1s and collapses on a 0; OR dually; MOD drops 0s. Other gate
    kinds are folded only when every input is constant.
    """
    n = c.ninputs
    newref: dict[int, int] = {}
    nodes: list[Node] = []

    def look(r):
        return newref.get(r, r)

    for j, nd in enumerate(c.nodes):
        ins = [look(r) for r in nd.inputs]
        nm = nd.kind.name
        consts = [r for r in ins if r < 0]
        res = None
        if len(consts) == len(ins):
            res = CONST1 if _gate_scalar(nd.kind, [int(r == CONST1) for r in ins]) else CONST0
        elif nm == "AND":
            if CONST0 in ins:
                res = CONST0
            else:
                ins = [r for r in ins if r != CONST1]
        elif nm == "OR":
            if CONST1 in ins:
                res = CONST1
            else:
                ins = [r for r in ins if r != CONST0]
        elif nm == "MOD":
            ins = [r for r in ins if r != CONST0]
        if res is None:
            newref[n + j] = n + len(nodes)
            nodes.append(Node(nd.kind, tuple(ins)))
        else:
            newref[n + j] = res
    return prune(Circuit(n, tuple(nodes), tuple(look(r) for r in c.outputs), c.name))


def single_gate(kind: GateKind, fanin: int, name: str = "gate") -> Circuit:
    """Circuit made of one gate reading x1..x_fanin."""
    return Circuit(fanin, (Node(kind, tuple(range(fanin))),), (fanin,), name)


def gk_to_cnf(kind: GateKind, fanin: int, cap: int = 1 << 20) -> Circuit:
    """Direct CNF for a G(k) gate: one clause per zero on the ball plus,
    for default 0, one clause per (k+1)-set forbidding weight above k."""
    if kind.name != "GK":
        raise InputError("gk_to_cnf expects a GK gate")
    f, k = fanin, kind.k
    if ball_size(f, k) > cap:
        raise ResourceError(f"ball of radius {k} over {f} inputs exceeds cap {cap}")
    b = CircuitBuilder(f, "cnf")
    negs = {}

    def lit(i, positive):
        if positive:
            return i
        if i not in negs:
            negs[i] = b.NOT(i)
        return negs[i]

    clauses = []
    for p, v in zip(ball_points(f, k), kind.table):
        if not v:
            clauses.append(b.OR(*[lit(i, not (p >> i & 1)) for i in range(f)]))
    if kind.default == 0 and k < f:
        for s in combinations(range(f), k + 1):
            clauses.append(b.OR(*[lit(i, False) for i in s]))
    top = b.AND(*clauses)
    return b.build([top])


@dataclass(frozen=True)
class LtfConversion:
    kind: GateKind
    k: int
    inequality_k: int
    rejected: bool
    verified: bool


def ltf_value(weights, theta, mask: int) -> int:
    return int(sum(w for i, w in enumerate(weights) if mask >> i & 1) > theta)


def biased_ltf_to_gk(weights: Sequence[float], theta: float, verify_limit: int = 20) -> LtfConversion:
    """G(k) gate equal to the threshold function [sum w_i x_i > theta].

    ``inequality_k`` is the least k with (sum of the f-k largest |w|) minus
    (sum of the k smallest |w|) below |theta|. That inequality alone does not
    force a constant value outside the ball when weights have mixed signs, so
    for f <= ``verify_limit`` the radius is instead the least k for which the
    threshold function is verified constant on every heavier input.
    """
    w = [float(v) for v in weights]
    f = len(w)
    a = sorted(abs(v) for v in w)
    ineq_k = f
    for k in range(f):
        if sum(a[k:]) - sum(a[:k]) < abs(theta):
            ineq_k = k
            break
    k, verified = ineq_k, False
    if f <= verify_limit:
        idx = np.arange(1 << f, dtype=np.int64)
        vals = (((idx[:, None] >> np.arange(f)) & 1) @ np.array(w) > theta) if f else np.array([0 > theta])
        wt = popcounts(f)
        k = 0
        while k < f:
            outside = vals[wt > k]
            if outside.all() or not outside.any():
                break
            k += 1
        verified = True
    default = ltf_value(w, theta, (1 << f) - 1) if k < f else 0
    kind = gk_from_function(f, k, default, lambda p: ltf_value(w, theta, p))
    return LtfConversion(kind, k, ineq_k, ineq_k >= f, verified)


def describe(c: Circuit) -> dict:
    return {"name": c.name, "ninputs": c.ninputs, "size": c.size, "depth": c.depth,
            "gates": len(c.nodes), "outputs": len(c.outputs)}

