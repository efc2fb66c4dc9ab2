import hashlib
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from charfield.algebra import RingSpec, additive_closure, all_subgroups, coset_test
from charfield.characterize import (
    feq_check,
    feq_sides,
    lemma1_roundtrip,
    lemma1_verify,
    lemma3_verify,
    lemma4_verify,
    lemma5_verify,
    mdiff,
    mdiff_iter,
    eq12_verify,
    random_dist,
    rational_grid,
    remark1_verify,
    remark2_counterexample,
    remark3_verify,
    support_subgroup,
    theorem1_verify,
    theorem2_search,
    theorem3_verify,
    trial_rng,
)
from charfield.errors import PreconditionViolated, ZeroValue
from charfield.measure import Dist, degenerate, haar, is_independent, marginals, push_T, uniform

F2 = RingSpec.prime_field(2)
F3 = RingSpec.prime_field(3)
F4 = RingSpec.extension_field(2, 2)
F5 = RingSpec.prime_field(5)
F7 = RingSpec.prime_field(7)
F9 = RingSpec.extension_field(3, 2)
Q = RingSpec.rationals()
T9 = F9.parse_element("t")
HALF = Fraction(1, 2)


# -- functional equation --------------------------------------------------------

def test_feq_examples():
    assert feq_check(degenerate(F5, 0), F5)
    assert feq_check(uniform(F3, range(3)), F3)
    v = feq_check(Dist(F3, {0: HALF, 1: HALF}), F3)
    assert not v
    assert v.witness == (2, 1)
    assert (v.lhs, v.rhs) == (0, Fraction(1, 16))


def _naive_feq(mu, R):
    # oracle: direct Fraction evaluation over every pair
    for u in R.elements():
        for v in R.elements():
            lhs, rhs = feq_sides(mu, R, u, v)
            if lhs != rhs:
                return False
    return True


def dists(R, with_zero=False):
    def build(w):
        if with_zero and not w[0]:
            w = [1] + w[1:]
        return Dist(R, {x: Fraction(m, sum(w)) for x, m in enumerate(w) if m})
    return st.lists(st.integers(0, 5), min_size=R.order, max_size=R.order).filter(any).map(build)


ODD = [F3, F5, F7, F9]


@settings(max_examples=150, deadline=None)
@given(st.sampled_from(ODD).flatmap(lambda R: dists(R, with_zero=True)))
def test_lemma1_equivalence_property(mu):
    R = mu.carrier
    ind = is_independent(push_T(mu, mu)).independent
    assert ind == feq_check(mu, R).passed == _naive_feq(mu, R)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(ODD).flatmap(lambda R: dists(R, with_zero=True)))
def test_solutions_have_subgroup_support(mu):
    R = mu.carrier
    if feq_check(mu, R):
        K = support_subgroup(mu, R)
        assert coset_test(R, K.elements)[1] == 0
        assert set(mu.pmf.values()) == {Fraction(1, K.cardinality)}


def test_subgroup_laws_solve_the_equation():
    for R in ODD:
        for K in all_subgroups(R):
            assert feq_check(haar(K), R)


def test_feq_on_rationals():
    assert feq_check(degenerate(Q, 0), Q)
    v = feq_check(Dist(Q, {0: HALF, 1: HALF}), Q)
    assert not v


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(1, 5)), min_size=1, max_size=4,
                unique_by=lambda t: t[0]))
def test_feq_on_rationals_matches_grid_scan(entries):
    # oracle: scan every (u, v) on the half-integer grid covering all sums and differences
    total = sum(w for _, w in entries)
    f = {Fraction(x): Fraction(w, total) for x, w in entries}
    grid = [Fraction(k, 2) for k in range(-34, 35)]
    brute = all(
        (f.get(u, 0) ** 2 * f.get(v, 0) * f.get(-v, 0)
         == f.get(Fraction(0), 0) ** 2 * f.get(u + v, 0) * f.get(u - v, 0))
        for u in grid for v in grid)
    assert feq_check(f, Q).passed == brute


def test_support_subgroup_examples():
    assert support_subgroup(uniform(F3, range(3)), F3).elements == frozenset(range(3))
    assert support_subgroup(degenerate(F5, 0), F5).elements == frozenset({0})
    line = additive_closure(F9, [T9])
    assert support_subgroup(haar(line), F9).elements == line.elements


def test_support_subgroup_preconditions():
    with pytest.raises(PreconditionViolated):
        support_subgroup(degenerate(F5, 1), F5)
    with pytest.raises(PreconditionViolated):
        support_subgroup(Dist(F3, {0: HALF, 1: HALF}), F3)


# -- multiplicative differences ---------------------------------------------

def test_mdiff_constant():
    g = mdiff(lambda x: Fraction(3, 7), 2)
    assert all(g(x) == 1 for x in range(-5, 6))


@pytest.mark.parametrize("q", [Fraction(2), Fraction(1, 3), Fraction(5, 2)])
def test_mdiff_quadratic_and_cubic(q):
    quad = lambda x: q ** (x * x)
    cube = lambda x: q ** (x ** 3)
    d3q = mdiff_iter(quad, 1, 3)
    d3c = mdiff_iter(cube, 1, 3)
    for x in range(-4, 5):
        assert d3q(x) == 1
        assert d3c(x) == q ** 6


def test_mdiff_of_affine_exponent_is_constant():
    g = mdiff(lambda x: Fraction(2) ** (3 * x + 1), 1)
    assert {g(x) for x in range(5)} == {8}


def test_mdiff_zero_value():
    with pytest.raises(ZeroValue):
        mdiff(degenerate(F5, 0), 1, F5.add)(1)


# -- discrete scenarios ------------------------------------------------------

def test_lemma1_roundtrip_examples():
    r = lemma1_roundtrip(uniform(F3, range(3)))
    assert r.passed and r.details["independent"] and r.details["feq"]
    r = lemma1_roundtrip(Dist(F3, {0: HALF, 1: HALF}))
    assert r.passed and not r.details["independent"] and not r.details["feq"]
    assert r.details["feq_witness"] == ["2", "1"]
    with pytest.raises(PreconditionViolated):
        lemma1_roundtrip(degenerate(F3, 1))


def test_lemma1_verify_small():
    r = lemma1_verify(F5, trials=60, seed=3)
    assert r.passed and r.counts == {"trials": 60, "passes": 60, "fails": 0}


def test_theorem1_f5_sweep():
    r = theorem1_verify(F5, trials=30, seed=1)
    assert r.passed
    assert r.details["subsets_swept"] == 31
    assert r.details["independent_subsets"] == 6


def test_theorem1_f9():
    r = theorem1_verify(F9, trials=30, seed=1)
    assert r.passed
    assert r.details["subgroups"] == 6
    # cosets: 1 of F_9, 3 of each of 4 lines, 9 singletons
    assert r.details["haar_shifts_checked"] == 22


def test_theorem1_rejects_char_two():
    with pytest.raises(PreconditionViolated):
        theorem1_verify(F4, trials=1)


def test_rational_grid():
    assert rational_grid(1, 2) == [Fraction(k, 2) for k in range(-2, 3)]


def test_theorem2_search_small():
    r = theorem2_search(radius=2, denom_bound=2, trials=40, seed=5)
    assert r.passed and r.fails == 0 and r.trials == 40


def test_remark1_examples():
    u = uniform(F2, range(2))
    v = is_independent(push_T(u, u))
    assert not v
    assert push_T(u, u)(0, 0) == HALF
    assert is_independent(push_T(degenerate(F4, F4.parse_element("t")), degenerate(F4, 0)))
    assert remark1_verify(F2).passed
    assert remark1_verify(F4, trials=25, seed=2).passed


@pytest.mark.parametrize("R", [F3, F5, F7, F9])
def test_remark2(R):
    r = remark2_counterexample(R)
    assert r.passed and r.witnesses == []
    assert r.details["class"] == "Other"


def test_remark2_f3_d_is_degenerate():
    r = remark2_counterexample(F3)
    assert r.details["mu"] == "1:1/2,2:1/2"
    mu = Dist(F3, {1: HALF, 2: HALF})
    _, d = marginals(push_T(mu, degenerate(F3, 0)))
    assert d.pmf == {1: 1}


@pytest.mark.parametrize("p,m", [(3, 0), (3, 1)])
def test_theorem3_haar(p, m):
    r = theorem3_verify(p, m, 3, trials=10, seed=0)
    assert r.passed
    assert r.details == {"haar_feq": True, "haar_residue_independent": True}


def test_theorem3_rejects_two():
    with pytest.raises(PreconditionViolated):
        theorem3_verify(2, 0, 3, trials=1)


@pytest.mark.parametrize("m,level,rhs", [(0, 2, "1/1"), (1, 3, "16/1"), (0, 3, "1/1")])
def test_remark3(m, level, rhs):
    r = remark3_verify(m, level)
    assert r.passed
    assert r.details["lhs"] == "0/1" and r.details["rhs"] == rhs
    assert r.details["residue_independent"] is False


def test_remark3_precondition():
    with pytest.raises(PreconditionViolated):
        remark3_verify(1, 2)


@pytest.mark.parametrize("p", [2, 3, 5])
def test_lemma3_verify(p):
    assert lemma3_verify(p, trials=20, seed=4).passed


def test_padic_scenarios():
    assert lemma4_verify(3, 5).passed
    assert eq12_verify(5, 3).passed
    assert lemma5_verify(3, 4).passed


def test_lemma4_two_adic_analogue_fails():
    r = lemma4_verify(2, 5)
    assert not r.passed and r.fails == r.trials


# -- seeding ------------------------------------------------------------------

def test_trial_rng_derivation():
    digest = hashlib.sha256(b"42:lemma1:7").digest()
    expected = random.Random(int.from_bytes(digest[:8], "big")).random()
    assert trial_rng(42, "lemma1", 7).random() == expected


def test_random_dist_forces_zero():
    for i in range(20):
        mu = random_dist(F7, trial_rng(0, "t", i), with_zero=True)
        assert mu(0) > 0


def test_workers_do_not_change_results():
    a = lemma1_verify(F5, trials=24, seed=9, workers=1)
    b = lemma1_verify(F5, trials=24, seed=9, workers=3)
    assert (a.passed, a.witnesses, a.counts, a.details) == (b.passed, b.witnesses, b.counts, b.details)
