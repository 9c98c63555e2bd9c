import numpy as np
from hypothesis import strategies as st

from gklab.ball import ball_size
from gklab.circuit import AND, GK, MAJ, MOD, NOT, OR, SYM, THR, Circuit, Node


def random_circuit(gen, n, gates, kinds=("AND", "OR", "NOT", "MOD", "GK", "MAJ", "THR", "SYM"),
                   q=3, k=1, max_fanin=4, name="rand"):
    """Random DAG mixing every gate kind; used for round-trip and evaluator checks."""
    nodes = []
    for j in range(gates):
        kind = kinds[int(gen.integers(len(kinds)))]
        pool = n + j
        f = 1 if kind == "NOT" else int(gen.integers(1, max_fanin + 1))
        ins = [int(gen.integers(pool)) for _ in range(f)]
        if gen.random() < 0.05:
            ins[0] = -1 - int(gen.integers(2))
        if kind == "AND":
            g = AND
        elif kind == "OR":
            g = OR
        elif kind == "NOT":
            g = NOT
        elif kind == "MOD":
            g = MOD(q)
        elif kind == "MAJ":
            g = MAJ
        elif kind == "THR":
            g = THR(int(gen.integers(0, f + 1)))
        elif kind == "SYM":
            g = SYM(gen.integers(0, 2, f + 1).tolist())
        else:
            kk = min(k, f)
            g = GK(kk, int(gen.integers(2)), gen.integers(0, 2, ball_size(f, kk)).tolist())
        nodes.append(Node(g, tuple(ins)))
    out = n + gates - 1 if gates else 0
    return Circuit(n, tuple(nodes), (out,), name)


@st.composite
def circuits(draw, n=None, gates=None, **kw):
    n = n if n is not None else draw(st.integers(1, 7))
    gates = gates if gates is not None else draw(st.integers(1, 15))
    seed = draw(st.integers(0, 2**32 - 1))
    return random_circuit(np.random.default_rng(seed), n, gates, **kw)
