"""Slow, independent reference implementations used as test oracles.

Nothing here imports the package's fast paths: polynomials are dicts of
frozensets, circuits are interpreted point by point, depths come from a
memoised recursion.
"""
from functools import lru_cache
from itertools import combinations, product
from math import comb


def bits_of(x, n):
    return tuple((x >> i) & 1 for i in range(n))


def index_of(bits):
    return sum(b << i for i, b in enumerate(bits))


# polynomials as {frozenset(1-based vars): coeff} ----------------------------------

def dict_eval(terms, bits, q):
    total = 0
    for mono, c in terms.items():
        if all(bits[v - 1] for v in mono):
            total += c
    return total % q


def dict_mul(a, b, q):
    out = {}
    for ma, ca in a.items():
        for mb, cb in b.items():
            m = ma | mb
            out[m] = (out.get(m, 0) + ca * cb) % q
    return {m: c for m, c in out.items() if c}


def ball_order(n, k):
    """Weight ascending, then lexicographic with x1 most significant."""
    pts = [p for p in product((0, 1), repeat=n) if sum(p) <= k]
    return sorted(pts, key=lambda p: (sum(p), tuple(p)))


def gauss_interpolate(truth, n, k, q):
    """Solve for the degree-<=k coefficients by Gaussian elimination over F_q."""
    monos = [frozenset(s) for d in range(k + 1) for s in combinations(range(1, n + 1), d)]
    pts = ball_order(n, k)
    rows = [[int(all(p[v - 1] for v in m)) for m in monos] + [truth[p] % q] for p in pts]
    ncol = len(monos)
    r = 0
    piv = []
    for c in range(ncol):
        sel = next((i for i in range(r, len(rows)) if rows[i][c] % q), None)
        if sel is None:
            continue
        rows[r], rows[sel] = rows[sel], rows[r]
        inv = pow(rows[r][c], q - 2, q)
        rows[r] = [v * inv % q for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                f = rows[i][c]
                rows[i] = [(vi - f * vr) % q for vi, vr in zip(rows[i], rows[r])]
        piv.append(c)
        r += 1
    sol = {}
    for i, c in enumerate(piv):
        if rows[i][ncol]:
            sol[monos[c]] = rows[i][ncol]
    return sol


# circuits ------------------------------------------------------------------------

def gate_value(kind, vals):
    nm, s = kind.name, sum(vals)
    if nm == "AND":
        return int(all(vals))
    if nm == "OR":
        return int(any(vals))
    if nm == "NOT":
        return 1 - vals[0]
    if nm == "MOD":
        return int(s % kind.m != 0)
    if nm == "MAJ":
        return int(2 * s >= len(vals))
    if nm == "THR":
        return int(s > kind.k)
    if nm == "SYM":
        return kind.table[s]
    if nm == "GK":
        if s > kind.k:
            return kind.default
        return kind.table[ball_order(len(vals), kind.k).index(tuple(vals))]
    raise ValueError(nm)


def interpret(c, bits):
    vals = list(bits)

    def get(r):
        return 0 if r == -1 else 1 if r == -2 else vals[r]

    for nd in c.nodes:
        vals.append(gate_value(nd.kind, [get(r) for r in nd.inputs]))
    return tuple(get(r) for r in c.outputs)


def table_by_interpretation(c, out=0):
    return [interpret(c, bits_of(x, c.ninputs))[out] for x in range(1 << c.ninputs)]


# decision trees ---------------------------------------------------------------------

def dt_depth(bits, n):
    @lru_cache(maxsize=None)
    def depth(pat):
        pts = [x for x in range(1 << n) if all(v == 2 or ((x >> i) & 1) == v for i, v in enumerate(pat))]
        if len({bits[x] for x in pts}) == 1:
            return 0
        return 1 + min(max(depth(pat[:i] + (0,) + pat[i + 1:]), depth(pat[:i] + (1,) + pat[i + 1:]))
                       for i in range(n) if pat[i] == 2)

    return depth((2,) * n)


# Fourier ---------------------------------------------------------------------------

def fourier_direct(bits, n):
    out = []
    for s in range(1 << n):
        tot = 0
        for x in range(1 << n):
            tot += (-1) ** (bits[x] + bin(x & s).count("1"))
        out.append(tot / 2 ** n)
    return out


# SYM+ --------------------------------------------------------------------------------

def symplus_naive(gates, sym, n):
    return [sym[sum(1 for g in gates if g & x == g)] for x in range(1 << n)]


# HLF -------------------------------------------------------------------------------

def hlf_q(A, b, u):
    n = len(u)
    quad = sum(A[i][j] * u[i] * u[j] for i in range(n) for j in range(n))
    return (quad + sum(bi * ui for bi, ui in zip(b, u))) % 4


def linearity_set_definitional(A, b, n):
    vecs = list(product((0, 1), repeat=n))
    out = []
    for u in vecs:
        if all(hlf_q(A, b, tuple(a ^ c for a, c in zip(u, v))) == (hlf_q(A, b, u) + hlf_q(A, b, v)) % 4
               for v in vecs):
            out.append(u)
    return out


def ball_size_pascal(n, k):
    return sum(comb(n, j) for j in range(min(n, k) + 1))
