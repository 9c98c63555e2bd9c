import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gklab import CircuitBuilder, TruthTable, truth_table
from gklab.circuit import MAJ, MOD, single_gate
from gklab.errors import InputError, ResourceError
from gklab.generators import random_gc0
from gklab.problems import (HlfInstance, RelationInstance, bending_threshold, best_linear_agreement,
                            counting_bounds, decode_trits, encode_trits, exact_correlation, grid_adjacency,
                            linearity_set, random_hlf, solve_2dhlf_bruteforce, verify_2dhlf, verify_relation,
                            xor_lemma_check)
from gklab.problems import _linear_exhaustive, _linear_symmetric, hlf_values

from oracles import ball_size_pascal, bits_of, hlf_q, linearity_set_definitional


def as_index(u):
    return sum(int(b) << i for i, b in enumerate(u))


# HLF -------------------------------------------------------------------------------

def test_grid_adjacency():
    A = grid_adjacency(3)
    assert (A == A.T).all()
    assert A.sum() == 2 * 12
    assert A[0, 1] == A[0, 3] == 1 and A[2, 3] == 0


def test_zero_instance():
    inst = HlfInstance(2, grid_adjacency(2) * 0, np.zeros(4, dtype=np.int64))
    assert len(linearity_set(inst)) == 16
    assert verify_2dhlf(inst, np.zeros(4))
    assert not verify_2dhlf(inst, np.array([1, 0, 0, 0]))


@pytest.mark.parametrize("b", [[0, 2, 2, 0], [2, 2, 2, 2], [0, 0, 2, 0]])
def test_linear_instance(b):
    inst = HlfInstance(2, np.zeros((4, 4), dtype=np.int64), np.array(b))
    assert verify_2dhlf(inst, np.array(b) // 2)
    assert verify_2dhlf(inst, solve_2dhlf_bruteforce(inst))


@given(st.integers(1, 3), st.integers(0, 2**32))
@settings(max_examples=30, deadline=None)
def test_linearity_paths_agree(side, seed):
    inst = random_hlf(side, seed)
    assert linearity_set(inst).tolist() == linearity_set(inst, definitional=True).tolist()


@given(st.integers(0, 2**32))
@settings(max_examples=25, deadline=None)
def test_linearity_set_matches_definition(seed):
    inst = random_hlf(2, seed)
    A, b = inst.A.tolist(), inst.b.tolist()
    want = sorted(as_index(u) for u in linearity_set_definitional(A, b, 4))
    assert linearity_set(inst).tolist() == want
    for x in range(16):
        assert hlf_q(A, b, bits_of(x, 4)) == int(hlf_values(inst, np.array(bits_of(x, 4))))


@pytest.mark.parametrize("side", [2, 3, 4])
@pytest.mark.parametrize("seed", range(6))
def test_solver_output_verifies(side, seed):
    inst = random_hlf(side, seed)
    z = solve_2dhlf_bruteforce(inst)
    assert verify_2dhlf(inst, z)
    members = set(linearity_set(inst).tolist())
    for u in list(members)[:40]:
        for v in list(members)[:40]:
            assert u ^ v in members


def test_hlf_json_round_trip_and_validation():
    inst = random_hlf(3, 5)
    back = HlfInstance.from_json(inst.to_json())
    assert (back.A == inst.A).all() and (back.b == inst.b).all()
    bad = inst.to_json()
    bad["b"] = "4" + bad["b"][1:]
    with pytest.raises(InputError):
        HlfInstance.from_json(bad)
    with pytest.raises(InputError):
        verify_2dhlf(inst, np.zeros(3))


def test_hlf_caps():
    with pytest.raises(ResourceError):
        linearity_set(random_hlf(5, 0))
    with pytest.raises(ResourceError):
        linearity_set(random_hlf(4, 0), definitional=True)


# relations -------------------------------------------------------------------------

def test_php_examples():
    inst = RelationInstance("PHP", ("0000", "0000"))
    assert verify_relation(inst, ["000", "000"]).success
    inst = RelationInstance("PHP", ("1100",))
    v = verify_relation(inst, ["100"])
    assert v.success and v.per_coordinate == (True,)
    assert not verify_relation(inst, ["000"]).success


def test_php_promise_violation():
    v = verify_relation(RelationInstance("PHP", ("100",)), ["0"])
    assert not v.success and "promise" in v.diagnostic


@pytest.mark.parametrize("r", [1, 3, 10, 30, 150, 200, 301])
def test_bending_threshold_boundary(r):
    need = bending_threshold(r)
    assert Fraction(need, r) >= Fraction(2, 3) + Fraction(5, 1000)
    assert Fraction(need - 1, r) < Fraction(2, 3) + Fraction(5, 1000)
    # all-zero trit inputs have weight 0 (divisible by 3), so the correct y has even weight
    xs = ("000",) * r
    right, wrong = "00", "10"
    for good, expect in ((need, True), (need - 1, False)):
        out = [right] * good + [wrong] * (r - good)
        assert verify_relation(RelationInstance("ParityBending3", xs), out).success is expect


def test_parity_bending_semantics():
    inst = RelationInstance("ParityBending3", ("12", "11", "0"))
    v = verify_relation(inst, ["11", "1", "00"])
    assert v.per_coordinate == (True, True, True)


def test_qr_parity_bending():
    inst = RelationInstance("QRParityBending", ("11", "10"), q=3)
    v = verify_relation(inst, ["111", "1"])
    assert v.per_coordinate == (True, True)
    with pytest.raises(InputError):
        RelationInstance("QRParityBending", ("1",))


def test_three_output_mod3():
    assert verify_relation(RelationInstance("ThreeOutputMod3", ("2211",)), ["0"]).success
    assert not verify_relation(RelationInstance("ThreeOutputMod3", ("2211",)), ["1"]).success


@given(st.text(alphabet="012", max_size=20))
def test_trit_encoding_round_trip(s):
    enc = encode_trits(s)
    assert len(enc) == 2 * len(s)
    assert decode_trits(enc) == s


def test_trit_encoding_rejects():
    with pytest.raises(InputError):
        decode_trits("11")
    with pytest.raises(InputError):
        decode_trits("0")
    with pytest.raises(InputError):
        RelationInstance("PHP", ("012",))


# correlation ----------------------------------------------------------------------

def test_correlation_examples():
    c = random_gc0(1, 8)
    assert exact_correlation(c, truth_table(c)) == 1.0
    b = CircuitBuilder(5)
    zero = b.build([-1])
    assert exact_correlation(zero, "MOD2") == 0.5
    assert exact_correlation(single_gate(MAJ, 5), "MAJ") == 1.0


@given(st.integers(0, 2**32), st.permutations(range(6)))
@settings(max_examples=30, deadline=None)
def test_correlation_relabeling_invariance(seed, perm):
    c = random_gc0(seed, 6)
    g = TruthTable(6, np.random.default_rng(seed).integers(0, 2, 64))
    f = truth_table(c)

    def relabel(t):
        return TruthTable(6, np.array([t[sum(((x >> i) & 1) << perm[i] for i in range(6))] for x in range(64)]))

    assert exact_correlation(f, g) == exact_correlation(relabel(f), relabel(g))


def brute_linear(n, q):
    best = 0.0
    pts = list(itertools.product((0, 1), repeat=n))
    for coef in itertools.product(range(q), repeat=n + 1):
        agree = sum((coef[0] + sum(a * b for a, b in zip(coef[1:], x))) % q == int(2 * sum(x) >= n) for x in pts)
        best = max(best, agree / len(pts))
    return best


@pytest.mark.parametrize("n", [3, 5])
def test_linear_agreement_matches_brute_force(n):
    val, coeffs = best_linear_agreement(n)
    assert val == pytest.approx(brute_linear(n, 3))
    assert len(coeffs) == n + 1


@pytest.mark.parametrize("n", [4, 6, 7])
def test_symmetric_reduction_matches_exhaustive(n):
    tgt = lambda w: int(2 * w >= n)
    assert _linear_symmetric(n, 3, tgt)[0] == pytest.approx(_linear_exhaustive(n, 3, tgt)[0])


def test_counting_examples():
    assert counting_bounds(5, 0)["ball_size"] == 1
    assert counting_bounds(5, 0)["log2_gk_gates_lower"] == 1
    assert counting_bounds(10, 2)["ball_size"] == 56
    assert counting_bounds(10, 10)["ball_size"] == 1024


@given(st.integers(0, 40), st.integers(0, 40))
@settings(max_examples=50, deadline=None)
def test_counting_threshold_is_least(n, k):
    rep = counting_bounds(n, k)
    assert rep["ball_size"] == ball_size_pascal(n, k)
    s = rep["tc0_size_threshold"]
    if s is not None:
        log_count = lambda s: s * (math.log2(4 * s) + math.log2(s + n + 2))
        assert log_count(s) >= rep["ball_size"]
        assert s == 1 or log_count(s - 1) < rep["ball_size"]


# XOR lemma ------------------------------------------------------------------------

def direct_characters(d, q):
    r = d.ndim
    best = 0.0
    for a in itertools.product(range(q), repeat=r):
        if not any(a):
            continue
        tot = sum(d[x] * np.exp(-2j * np.pi * sum(ai * xi for ai, xi in zip(a, x)) / q)
                  for x in itertools.product(range(q), repeat=r))
        best = max(best, abs(tot))
    return best


def test_xor_examples():
    u = xor_lemma_check(np.full((3, 3), 1 / 9), 3)
    assert u.max_bias == pytest.approx(0, abs=1e-12) and u.tv == pytest.approx(0, abs=1e-12)
    pm = xor_lemma_check(np.array([1.0, 0, 0]), 3)
    assert pm.max_bias == pytest.approx(1.0)
    assert pm.tv == pytest.approx(2 / 3)
    assert pm.holds and pm.bound == pytest.approx(math.sqrt(3))


@given(st.sampled_from([(2, 3), (3, 2), (5, 1), (3, 3)]), st.integers(0, 2**32))
@settings(max_examples=40, deadline=None)
def test_xor_matches_direct_sum(shape, seed):
    q, r = shape
    d = np.random.default_rng(seed).random((q,) * r)
    d /= d.sum()
    rep = xor_lemma_check(d, q)
    assert rep.max_bias == pytest.approx(direct_characters(d, q))
    assert rep.holds


def test_xor_inequality_sweep():
    gen = np.random.default_rng(0)
    for i in range(1000):
        q = (2, 3, 5)[i % 3]
        r = 1 + i % 3
        d = gen.dirichlet(np.full(q ** r, 0.3)).reshape((q,) * r)
        assert xor_lemma_check(d, q).holds


def test_xor_rejects_unnormalised():
    with pytest.raises(InputError):
        xor_lemma_check(np.array([0.5, 0.4, 0.0]), 3)
    with pytest.raises(InputError):
        xor_lemma_check(np.ones((3, 2)) / 6, 3)
