import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gklab import CircuitBuilder, FieldPoly, TruthTable, truth_table
from gklab.circuit import AND, GK, MOD, OR, single_gate
from gklab.errors import InputError, ResourceError, UnsupportedInputError
from gklab.generators import random_gk
from gklab.probpoly import (ExactThr, circuit_poly_sampler, estimate_pointwise_error, gk_poly_sampler,
                            gk_poly_symbolic, instrumented_table, min_prob_degree_oracle, or_poly_sampler)
from gklab.probpoly import _OrInst
from gklab._util import rng

from oracles import bits_of


def exact_or_error(n, q, t):
    """Pr over all uniform linear forms (enumerated) that t forms all vanish at x."""
    forms = np.array(list(itertools.product(range(q), repeat=n)))
    errs = []
    for x in range(1 << n):
        bits = np.array(bits_of(x, n))
        if not x:
            errs.append(0.0)
            continue
        vanish = np.mean(forms @ bits % q == 0)
        errs.append(vanish ** t)
    return np.array(errs)


def test_or_sampler_parameters():
    inst = _OrInst(3, 3, 1 / 9)
    assert inst.t == 2
    assert inst.degree() == 4


@pytest.mark.parametrize("q", [2, 3, 5])
def test_or_sampler_exact_at_zero_and_proper(q):
    s = or_poly_sampler(5, q, 0.1)
    for seed in range(50):
        tab = s.table(seed)
        assert tab[0] == 0
        assert set(np.unique(tab)) <= {0, 1}
    assert s.sample(3).degree <= s.degree_bound


def test_or_sampler_error_matches_enumeration():
    n, q, eps = 6, 3, 1 / 9
    s = or_poly_sampler(n, q, eps)
    exact = exact_or_error(n, q, _OrInst(q, n, eps).t)
    assert np.allclose(exact[1:], 1 / 9)
    rep = estimate_pointwise_error(s, trials=4000, seed=2)
    covered = np.mean(rep.upper >= exact - 1e-12)
    assert covered >= 0.95
    assert rep.wilson_hi >= exact.max()
    assert rep.max_point_error <= 1 / 9 + 0.03


def test_gk_sampler_or_case_symbolic():
    # OR as G(0): value 0 at the origin, default 1
    kind = GK(0, 1, [0])
    for seed in range(5):
        p = gk_poly_symbolic(kind, 6, 3, 0.2, seed)
        s = gk_poly_sampler(kind, 6, 3, 0.2)
        assert p == s.sample(seed)
        assert p.is_proper()
        assert int(p(0)) == 0


def test_gk_constant_gate():
    for c in (0, 1):
        s = gk_poly_sampler(GK(0, c, [c]), 5, 3, 0.1)
        for seed in range(20):
            assert (s.table(seed) == c).all()


@pytest.mark.parametrize("k", [1, 2])
def test_gk_sampler_one_sided(k):
    gen = rng(11, k)
    n, q = 6, 3
    for _ in range(5):
        kind = random_gk(gen, n, k)
        s = gk_poly_sampler(kind, n, q, 0.1)
        ref = s.reference.bits.astype(int)
        light = np.array([bin(x).count("1") <= k for x in range(1 << n)])
        tabs = s.tables([rng(5, t) for t in range(200)])
        assert (tabs[:, light] == ref[light]).all()
        assert set(np.unique(tabs)) <= {0, 1}


@given(st.integers(0, 2**32), st.integers(1, 2))
@settings(max_examples=15, deadline=None)
def test_batched_and_single_draws_agree(seed, k):
    kind = random_gk(np.random.default_rng(seed), 5, k)
    s = gk_poly_sampler(kind, 5, 3, 0.2)
    gens = [rng(seed, t) for t in range(6)]
    batch = s.tables(gens)
    single = np.stack([s.draw(rng(seed, t)) for t in range(6)])
    assert (batch == single).all()


def test_symbolic_matches_tables_random():
    gen = rng(4)
    for _ in range(4):
        kind = random_gk(gen, 5, 1)
        s = gk_poly_sampler(kind, 5, 3, 0.3)
        for seed in range(3):
            assert [int(v) for v in gk_poly_symbolic(kind, 5, 3, 0.3, seed).table()] == s.table(seed).tolist()


def test_exact_thr_source_is_deterministic_and_exact():
    kind = random_gk(rng(9), 6, 1)
    s = gk_poly_sampler(kind, 6, 3, 0.0, thr=ExactThr(1))
    rep = estimate_pointwise_error(s, trials=20)
    assert rep.max_point_error == 0.0


def test_threshold_budget_violation():
    class Loose(ExactThr):
        pass
    with pytest.raises(InputError):
        gk_poly_sampler(GK(1, 0, [0] * 4), 3, 3, 0.01, thr=Loose(1, error=0.5))


def test_not_circuit_is_one_minus_x():
    b = CircuitBuilder(1)
    s = circuit_poly_sampler(b.build([b.NOT(b.x(1))]), 3, 0.1)
    assert s.sample(0) == FieldPoly.from_monomials(3, 1, {(): 1, (1,): 2})
    assert estimate_pointwise_error(s, trials=10).max_point_error == 0


def test_mod_circuit_deterministic():
    c = single_gate(MOD(3), 3)
    s = circuit_poly_sampler(c, 3, 0.1)
    for seed in range(5):
        assert s.table(seed).tolist() == truth_table(c).bits.astype(int).tolist()


def test_mod_mismatch_rejected():
    with pytest.raises(UnsupportedInputError):
        circuit_poly_sampler(single_gate(MOD(2), 3), 3, 0.1)


def test_depth2_gk_over_ands():
    gen = rng(21)
    b = CircuitBuilder(8)
    ands = [b.AND(b.x(2 * i + 1), b.x(2 * i + 2)) for i in range(4)]
    kind = random_gk(gen, 4, 1, default=1)
    c = b.build([b.add(kind, ands)])
    eps = 0.1
    s = circuit_poly_sampler(c, 3, eps)
    rep = estimate_pointwise_error(s, trials=600, seed=1)
    assert rep.wilson_hi <= eps + 0.05
    assert rep.max_point_error <= eps


@given(st.integers(0, 2**32))
@settings(max_examples=20, deadline=None)
def test_composition_soundness(seed):
    from gklab.generators import random_gc0
    c = random_gc0(seed, 6, k=1, q=3, layers=2, width=3)
    vals, ok = instrumented_table(c, 3, 0.2, seed)
    ref = truth_table(c).bits.astype(int)
    assert (vals[ok] == ref[ok]).all()
    assert set(np.unique(vals)) <= {0, 1}


def test_estimate_sampled_points_and_determinism():
    s = or_poly_sampler(8, 3, 0.2)
    a = estimate_pointwise_error(s, trials=100, points="sampled", npoints=32, seed=7)
    b = estimate_pointwise_error(s, trials=100, points="sampled", npoints=32, seed=7, chunk=17)
    assert len(a.points) == 32
    assert a.to_json() == b.to_json()
    with pytest.raises(InputError):
        estimate_pointwise_error(s, trials=10, points="grid")


def test_estimate_uses_given_reference():
    s = or_poly_sampler(4, 3, 0.1)
    rep = estimate_pointwise_error(s, reference=TruthTable(4, np.zeros(16)), trials=50)
    assert rep.max_point_error > 0.5


# degree oracle --------------------------------------------------------------------

def brute_min_error(f, dist, q, d):
    n = f.nvars
    monos = [m for m in range(1 << n) if bin(m).count("1") <= d]
    best = 1.0
    for coef in itertools.product(range(q), repeat=len(monos)):
        err = 0.0
        for x in range(1 << n):
            v = sum(c for c, m in zip(coef, monos) if x & m == m) % q
            err += dist[x] * (v != f[x])
        best = min(best, err)
    return best


def test_degree_oracle_examples():
    uni = np.full(4, 0.25)
    and2 = TruthTable.from_string("0001")
    assert min_prob_degree_oracle(TruthTable.from_string("1111"), uni, 0.0, 3, 2).degree == 0
    assert min_prob_degree_oracle(and2, uni, 0.0, 3, 2).degree == 2
    assert min_prob_degree_oracle(and2, uni, 0.25, 3, 2).degree <= 1


@given(st.integers(0, 15), st.sampled_from([2, 3]), st.integers(0, 2))
@settings(max_examples=30, deadline=None)
def test_degree_oracle_matches_brute_force(bits, q, d):
    f = TruthTable(2, np.array([(bits >> i) & 1 for i in range(4)]))
    dist = np.array([0.1, 0.2, 0.3, 0.4])
    res = min_prob_degree_oracle(f, dist, 0.0, q, d)
    for deg, err in enumerate(res.best_errors):
        assert err == pytest.approx(brute_min_error(f, dist, q, deg))


def test_degree_oracle_errors():
    f = TruthTable.from_string("0001")
    with pytest.raises(InputError):
        min_prob_degree_oracle(f, [0.5, 0.5, 0.5, 0.5], 0.0, 3, 1)
    with pytest.raises(ResourceError):
        min_prob_degree_oracle(TruthTable(8, np.zeros(256)), np.full(256, 1 / 256), 0.0, 3, 8)
