"""Seeded random instances: GK gates, GC0(k)[q] circuits, shaped depth-4 circuits, DNFs."""
from __future__ import annotations

import numpy as np

from ._util import rng
from .ball import ball_size
from .circuit import AND, GK, MOD, OR, Circuit, CircuitBuilder, GateKind


def random_gk(gen: np.random.Generator, fanin: int, k: int, default: int | None = None) -> GateKind:
    if default is None:
        default = int(gen.integers(2))
    return GK(k, default, gen.integers(0, 2, size=ball_size(fanin, k)).tolist())


def _literal(b: CircuitBuilder, gen, n: int) -> int:
    x = b.x(int(gen.integers(1, n + 1)))
    return b.NOT(x) if gen.random() < 0.5 else x


def random_gc0(seed: int, n: int, k: int = 1, q: int = 3, layers: int = 2, width: int = 4,
               fanin: tuple[int, int] = (2, 4), unsat_fraction: float = 0.0, name: str = "rand") -> Circuit:
    """Layered circuit of AND/OR/MOD_q/GK(k) gates with random negations.

    With probability ``unsat_fraction`` the output is C AND NOT C', where C'
    is C with an identical copy of its top gate, giving an unsatisfiable circuit.
    """
    gen = rng(seed)
    b = CircuitBuilder(n, name)
    prev = [b.x(i) for i in range(1, n + 1)]
    kinds = ("AND", "OR", "MOD", "GK")
    for layer in range(layers):
        cur = []
        count = 1 if layer == layers - 1 else width
        for _ in range(count):
            f = int(gen.integers(fanin[0], fanin[1] + 1))
            pool = prev + ([b.x(i) for i in range(1, n + 1)] if layer else [])
            picks = gen.choice(len(pool), size=min(f, len(pool)), replace=False)
            ins = [pool[int(i)] for i in picks]
            ins = [b.NOT(r) if gen.random() < 0.3 else r for r in ins]
            kind = kinds[int(gen.integers(len(kinds)))]
            if kind == "MOD":
                g = MOD(q)
            elif kind == "GK":
                g = random_gk(gen, len(ins), min(k, len(ins)))
            else:
                g = AND if kind == "AND" else OR
            cur.append(b.add(g, ins))
        prev = cur
    out = prev[0]
    if gen.random() < unsat_fraction:
        nd = b.nodes[out - n]
        twin = b.add(nd.kind, list(nd.inputs))
        out = b.AND(out, b.NOT(twin))
    return b.build([out])


def shaped_depth4(seed: int, n: int, p: int, s1: int, t: int, s2: int, r: int,
                  top_negated: bool = False, middle_negations: bool = False) -> Circuit:
    """MOD_p(s1 x AND(t x MOD_p(s2 x AND(r literals)))) with random literals.

    With ``middle_negations`` each middle MOD is negated with probability 1/2.
    """
    gen = rng(seed)
    b = CircuitBuilder(n, f"ah_{p}_{s1}_{t}_{s2}_{r}")
    tops = []
    for _ in range(s1):
        mids = []
        for _ in range(t):
            atoms = []
            for _ in range(s2):
                lits = [_literal(b, gen, n) for _ in range(r)]
                atoms.append(b.AND(*lits))
            mod = b.MOD(p, *atoms)
            flip = gen.random() < 0.5
            mids.append(b.NOT(mod) if middle_negations and flip else mod)
        tops.append(b.AND(*mids))
    out = b.MOD(p, *tops)
    return b.build([b.NOT(out) if top_negated else out])


def random_dnf(seed: int, n: int, clauses: int, width: int) -> Circuit:
    """OR of ``clauses`` ANDs over ``width`` distinct variables each, random signs."""
    gen = rng(seed)
    b = CircuitBuilder(n, f"dnf{clauses}x{width}")
    terms = []
    for _ in range(clauses):
        vs = gen.choice(n, size=width, replace=False)
        lits = [b.x(int(v) + 1) for v in vs]
        terms.append(b.AND(*[b.NOT(x) if gen.random() < 0.5 else x for x in lits]))
    return b.build([b.OR(*terms) if clauses > 1 else terms[0]])


def random_mod_of_ands(seed: int, n: int, q: int, gates: int, width: tuple[int, int] = (1, 3)) -> Circuit:
    gen = rng(seed)
    b = CircuitBuilder(n, "modands")
    ands = []
    for _ in range(gates):
        w = int(gen.integers(width[0], width[1] + 1))
        vs = gen.choice(n, size=min(w, n), replace=False)
        ands.append(b.AND(*[b.x(int(v) + 1) for v in vs]))
    return b.build([b.MOD(q, *ands)])


__all__ = ["random_gk", "random_gc0", "shaped_depth4", "random_dnf", "random_mod_of_ands"]
