from fractions import Fraction

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from charfield.errors import (
    DivisionByZero,
    InsufficientPrecision,
    NotASquare,
    PrecisionExhausted,
    PreconditionViolated,
    ScaleError,
    UnsupportedPrime,
)
from charfield.padic import (
    Ball,
    PAdic,
    ball_residues,
    branch_table,
    eq12_check,
    is_square,
    lemma4_check,
    lemma5_check,
    norm,
    padd,
    pdiv,
    pmul,
    primitive_root,
    psub,
    s_maps,
    sqrt_hensel,
    sqrt_lipschitz_check,
    sqrt_series,
    teichmuller,
    valuation,
)


def P(p, x, prec=8):
    return PAdic.from_rational(p, x, prec)


# -- arithmetic --------------------------------------------------------------

def test_mul_small():
    assert pmul(P(7, 2), P(7, 3)).matches(P(7, 6))
    assert pmul(P(7, 2), P(7, 3)).to_rational() == 6


def test_div_at_relative_precision_two():
    q = pdiv(P(7, 1, 2), P(7, 3, 2))
    assert q.digits == (5, 4)
    assert q.val == 0 and q.prec == 2


def test_add_carries_into_valuation():
    s = padd(P(7, 1), P(7, 6))
    assert s.val == 1
    assert s.digits[0] == 1
    assert norm(s) == Fraction(1, 7)


def test_cancellation_gives_tracked_zero():
    z = psub(P(5, 3, 4), P(5, 3, 4))
    assert z.is_zero
    assert z.abs_prec == 4
    with pytest.raises(PrecisionExhausted):
        z.residue(5)


def test_division_by_zero():
    with pytest.raises(DivisionByZero):
        pdiv(P(7, 1), P(7, 0))


@pytest.mark.parametrize("x,expected", [(7, Fraction(1, 7)), (0, 0), (Fraction(1, 3), 1), (Fraction(5, 49), 49)])
def test_norm(x, expected):
    assert norm(P(7, x)) == expected


def test_residue_outside_zp():
    with pytest.raises(ScaleError):
        P(3, Fraction(1, 3)).residue(2)


@settings(max_examples=200, deadline=None)
@given(st.sampled_from([2, 3, 5, 7]), st.fractions(max_denominator=200), st.fractions(max_denominator=200))
def test_arithmetic_is_a_ring_map(p, a, b):
    # reduction to a residue commutes with + and * for p-integral inputs
    assume(a != 0 and b != 0 and valuation(a, p) >= 0 and valuation(b, p) >= 0)
    level = 5
    mod = p ** level
    def red(x):
        return x.numerator * pow(x.denominator, -1, mod) % mod
    A, B = P(p, a, 12), P(p, b, 12)
    assert pmul(A, B).residue(level) == red(a * b)
    if a + b != 0 and valuation(a + b, p) < 12:
        assert padd(A, B).residue(level) == red(a + b)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([3, 5, 7]), st.fractions(max_denominator=500))
def test_norm_is_multiplicative(p, x):
    assume(x != 0)
    y = Fraction(p * p + 1, p)
    assert norm(pmul(P(p, x), P(p, y))) == norm(P(p, x)) * norm(P(p, y))


# -- squares and branch tables ----------------------------------------------

@pytest.mark.parametrize("p,x,expected", [(7, 2, True), (7, 7, False), (2, 17, True), (2, 3, False), (7, 3, False), (5, Fraction(4, 25), True)])
def test_is_square(p, x, expected):
    assert is_square(P(p, x)) is expected


def test_is_square_two_adic_needs_three_digits():
    with pytest.raises(InsufficientPrecision):
        is_square(P(2, 17, 2))


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
def test_is_square_matches_residue_scan(p):
    # oracle: unit squares mod p by squaring every residue
    squares = {x * x % p for x in range(1, p)}
    for c in range(1, p):
        assert is_square(P(p, c)) == (c in squares)


def test_two_adic_square_by_residue_scan():
    assert any(t * t % 64 == 17 for t in range(64))


@pytest.mark.parametrize("p,g,residues", [(7, 3, {3, 2, 6}), (5, 2, {2, 4}), (3, 2, {2}), (11, 2, {2, 4, 8, 5, 10})])
def test_branch_table(p, g, residues):
    t = branch_table(p)
    assert t.primitive_root == g == primitive_root(p)
    assert t.branch_residues == frozenset(residues)
    negs = {(-r) % p for r in residues}
    assert negs | set(residues) == set(range(1, p)) and not negs & set(residues)


def test_branch_table_two():
    t = branch_table(2)
    assert "1 (mod 4)" in t.rule
    assert t.selects(5) and not t.selects(3)


# -- square roots --------------------------------------------------------------

def test_sqrt_examples_q7():
    assert sqrt_hensel(P(7, 4)).matches(P(7, 2))
    s2 = sqrt_hensel(P(7, 2))
    assert s2.residue(2) == 3 + 1 * 7
    assert sqrt_hensel(P(7, 1)).matches(P(7, -1))


def test_sqrt_examples_q2():
    assert sqrt_hensel(P(2, 9, 10)).matches(P(2, -3, 10))
    assert sqrt_hensel(P(2, 25, 10)).matches(P(2, 5, 10))


def test_sqrt_rejects_non_squares():
    with pytest.raises(NotASquare):
        sqrt_hensel(P(7, 3))
    with pytest.raises(NotASquare):
        sqrt_hensel(P(7, 7))


def test_sqrt_of_zero_halves_precision():
    z = sqrt_hensel(PAdic.zero(5, 7))
    assert z.is_zero and z.val == 4


def test_series_examples():
    t = branch_table(7)
    assert sqrt_series(P(7, 2), t).with_abs_prec(6).matches(sqrt_hensel(P(7, 2), t))
    eps = teichmuller(t.primitive_root, 7, 8)
    e = PAdic(7, 0, eps, 8)
    assert sqrt_series(pmul(e, e), t).matches(e)
    t5 = branch_table(5)
    assert sqrt_series(P(5, 100), t5).matches(pmul(sqrt_hensel(P(5, 4), t5), P(5, 5)))


def test_series_unsupported_for_two():
    with pytest.raises(UnsupportedPrime):
        sqrt_series(P(2, 9))


@pytest.mark.parametrize("p", [3, 5, 7, 11])
def test_teichmuller_is_a_root_of_unity(p):
    g = primitive_root(p)
    level = 6
    eps = teichmuller(g, p, level)
    assert eps % p == g
    assert pow(eps, p - 1, p ** level) == 1


def _brute_roots(c, p, level):
    mod = p ** level
    return [t for t in range(mod) if t * t % mod == c % mod]


@pytest.mark.parametrize("p", [3, 5, 7])
def test_sqrt_against_brute_force_roots(p):
    # oracle: enumerate every t mod p^4 with t^2 = c, keep the branch-selected one
    table = branch_table(p)
    level = 4
    for c in range(1, p ** 2):
        if c % p == 0 or not is_square(P(p, c)):
            continue
        roots = [t for t in _brute_roots(c, p, level) if t % p in table.branch_residues]
        assert len(roots) == 1
        assert sqrt_hensel(P(p, c), table).residue(level) == roots[0]


@pytest.mark.parametrize("c", [1, 9, 17, 25, 33, 41, 49, 57])
def test_two_adic_sqrt_against_brute_force(c):
    # roots of a unit square mod 2^6 are only determined mod 2^5
    level = 5
    s = sqrt_hensel(P(2, c, 10))
    assert s.unit % 4 == 1
    assert s.residue(level) in {t % 2 ** level for t in _brute_roots(c, 2, level + 1)}


@settings(max_examples=150, deadline=None)
@given(st.sampled_from([3, 5, 7, 11]), st.integers(1, 10 ** 6), st.integers(-2, 2))
def test_sqrt_properties(p, t, l):
    assume(t % p)
    prec = 8
    x = PAdic(p, 2 * l, t * t % p ** prec, prec)
    table = branch_table(p)
    s = sqrt_hensel(x, table)
    assert pmul(s, s).matches(x)
    assert 2 * s.val == x.val
    assert table.selects(s.unit)
    assert sqrt_series(x, table) == s
    scaled = PAdic(p, x.val + 2, x.unit, x.prec)
    assert sqrt_hensel(scaled, table).matches(pmul(P(p, p), s))


# -- balls and residue models ------------------------------------------------

@pytest.mark.parametrize("p,c,k,level,expected", [
    (3, 1, 1, 2, {1, 4, 7}),
    (3, 0, 2, 2, {0}),
    (5, 2, 1, 2, {2, 7, 12, 17, 22}),
])
def test_ball_residues(p, c, k, level, expected):
    assert ball_residues(Ball(P(p, c), k), level) == frozenset(expected)


def test_ball_membership():
    b = Ball(P(3, 1), 2)
    assert b.contains(P(3, 10))
    assert not b.contains(P(3, 4))


def test_lemma4_examples():
    assert lemma4_check(P(3, 0), P(3, 1), 1, 4)
    assert lemma4_check(P(5, 0), P(5, 5), 2, 5)
    with pytest.raises(PreconditionViolated):
        lemma4_check(P(3, 0), P(3, 1), 0, 4)


def _brute_image(p, x0, y0, k, level):
    mod = p ** level
    step = p ** k
    xs = [(x0 + step * a) % mod for a in range(p ** (level - k))]
    ys = [(y0 + step * b) % mod for b in range(p ** (level - k))]
    return {((x + y) % mod, (x - y) ** 2 % mod) for x in xs for y in ys}


@pytest.mark.parametrize("p,x0,y0,k,level", [(3, 0, 1, 1, 4), (3, 2, 5, 2, 4), (5, 1, 3, 1, 3)])
def test_ball_image_is_a_rectangle_by_brute_force(p, x0, y0, k, level):
    # oracle independent of lemma4_check: the image equals the product ball it predicts
    l = valuation(y0 - x0, p)
    img = _brute_image(p, x0, y0, k, level)
    s0, d0 = (x0 + y0) % p ** level, (x0 - y0) ** 2 % p ** level
    rect = {((s0 + p ** k * a) % p ** level, (d0 + p ** (k + l) * b) % p ** level)
            for a in range(p ** level) for b in range(p ** level)}
    assert img == rect
    assert lemma4_check(P(p, x0), P(p, y0), k, level)


def test_two_adic_ball_image_is_only_half_the_rectangle():
    # S mod 2^(k+1) and D mod 2^(k+2) both follow the parity of a +- b, so they are tied
    k, level = 2, 5
    img = _brute_image(2, 0, 1, k, level)
    coarse = {(s % 2 ** (k + 1), d % 2 ** (k + 2)) for s, d in img}
    assert coarse == {(1, 1), (5, 9)}
    assert not lemma4_check(P(2, 0), P(2, 1), k, level)


@pytest.mark.parametrize("p,c,m,level,expected", [
    (3, 1, 1, 3, True),
    (5, 2, 1, 3, True),
    (3, 1, 0, 1, False),
    (7, 3, 2, 3, True),
])
def test_eq12(p, c, m, level, expected):
    assert eq12_check(p, c, m, level) is expected


def test_s_maps():
    t = branch_table(7)
    (x, y), (y2, x2) = s_maps(P(7, 0), P(7, 1), t)
    assert x.matches(P(7, Fraction(-1, 2))) and y.matches(P(7, Fraction(1, 2)))
    assert x.residue(1) == 3 and y.residue(1) == 4
    assert (x2, y2) == (x, y)
    (a, b), _ = s_maps(P(7, 0), P(7, 4), t)
    assert a.matches(P(7, 1)) and b.matches(P(7, -1))


@pytest.mark.parametrize("p,u0,v0,k,level", [(7, 0, 1, 1, 3), (3, 0, 1, 1, 4), (7, 0, 49, 2, 5), (3, 1, 4, 2, 4)])
def test_lemma5(p, u0, v0, k, level):
    res = lemma5_check(P(p, u0), P(p, v0), k, level)
    assert res.disjoint and res.jacobian_ok
    assert sqrt_lipschitz_check(P(p, v0), k, level, branch_table(p))


def test_json_round_trip():
    x = sqrt_hensel(P(7, 2))
    assert PAdic.from_json(x.to_json()) == x
    z = PAdic.zero(3, 5)
    assert PAdic.from_json(z.to_json()) == z
