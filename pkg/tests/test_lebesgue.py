from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from lpiso.errors import FormatError, SpaceMismatch
from lpiso.lebesgue import (
    Kind,
    LpSpace,
    LpVector,
    StepFunction,
    disjointly_supported,
    distance,
    dyadic_interval,
    format_vector,
    is_component,
    lp_sum_embed,
    norm,
    norm_pow,
    parse_vector,
    pth_power_exact,
    standard_generator,
)

from conftest import mp_contains, mp_norm, mp_pth_power, space_and_vectors, vectors

HALF = Fraction(1, 2)


def test_l1_norm_of_ones():
    sp = LpSpace(Kind.LPN, 1, 2)
    assert 2 in norm(sp.atom(0) + sp.atom(1), 20)


@pytest.mark.parametrize("p", [1, Fraction(3, 2), 2, 3, Fraction(7, 3)])
def test_unit_indicator_has_norm_one(p):
    v = LpSpace(Kind.LP01, p).indicator(0, 1)
    n = norm(v, 20)
    assert (n.lo, n.hi) == (1, 1)


def test_sum_space_norm_sqrt_two():
    sp = LpSpace(Kind.LPN_SUM, 2, 1)
    n = norm(sp.atom(0) + sp.indicator(0, 1), 20)
    with mpmath.workdps(40):
        assert mp_contains(n, mpmath.sqrt(2))
    assert n.width <= Fraction(1, 2 ** 20)


def test_half_indicator_in_l3():
    n = norm(LpSpace(Kind.LP01, 3).indicator(0, HALF), 20)
    with mpmath.workdps(40):
        assert mp_contains(n, mpmath.cbrt(mpmath.mpf(1) / 2))


def test_disjointness_examples():
    lp = LpSpace(Kind.LP, 3)
    assert disjointly_supported(lp.atom(0), lp.atom(1))
    L = LpSpace(Kind.LP01, 1)
    assert disjointly_supported(L.indicator(0, HALF), L.indicator(HALF, 1))
    assert not disjointly_supported(L.indicator(0, Fraction(3, 4)), L.indicator(HALF, 1))


def test_component_examples():
    L = LpSpace(Kind.LP01, 1)
    f = L.indicator(Fraction(1, 4), Fraction(3, 8), 5)
    assert is_component(f, f)
    assert is_component(L.indicator(0, HALF), L.indicator(0, 1))
    lp = LpSpace(Kind.LP, 1)
    assert not is_component(lp.atom(0) + lp.atom(1), lp.atom(0))


def test_vector_arithmetic_examples():
    L = LpSpace(Kind.LP01, 1)
    assert L.indicator(0, 1) - L.indicator(0, HALF) == L.indicator(HALF, 1)
    assert L.indicator(0, 1).scale(0).is_zero()
    lp = LpSpace(Kind.LP, 1)
    assert lp.atom(0) + lp.atom(0) == lp.atom(0, 2)


def test_sum_embedding():
    a, c = LpSpace(Kind.LPN, 1, 3), LpSpace(Kind.LP01, 1)
    assert lp_sum_embed(a.zero(), c.zero()).is_zero()
    assert 1 in norm(lp_sum_embed(a.atom(0), c.zero()), 10)
    assert 2 in norm(lp_sum_embed(LpSpace(Kind.LPN, 1, 1).atom(0), c.indicator(0, 1)), 10)
    with pytest.raises(SpaceMismatch):
        lp_sum_embed(a.atom(0), LpSpace(Kind.LP01, 2).zero())


def test_exponent_below_one_rejected():
    with pytest.raises(ValueError):
        LpSpace(Kind.LP01, HALF)


def test_space_mismatch():
    with pytest.raises(SpaceMismatch):
        LpSpace(Kind.LP, 1).atom(0) + LpSpace(Kind.LP, 2).atom(0)
    with pytest.raises(SpaceMismatch):
        LpSpace(Kind.LPN, 1, 2).atom(2)
    with pytest.raises(SpaceMismatch):
        LpVector(LpSpace(Kind.LP, 1), continuous=StepFunction.indicator(0, 1))


def test_breadth_first_dyadic_intervals():
    assert [dyadic_interval(i) for i in range(4)] == [
        (0, 1), (0, HALF), (HALF, 1), (0, Fraction(1, 4))]


def test_sum_generator_order():
    s = LpSpace(Kind.LP_SUM, 1)
    assert standard_generator(s, 0) == s.atom(0)
    assert standard_generator(s, 1) == s.indicator(0, 1)
    assert standard_generator(s, 2) == s.atom(1)
    n = LpSpace(Kind.LPN_SUM, 1, 2)
    assert [standard_generator(n, i) for i in range(3)] == [n.atom(0), n.atom(1), n.indicator(0, 1)]


def test_parse_rejects_garbage():
    sp = LpSpace(Kind.LPN_SUM, 1, 2)
    for bad in ("", "[0:1] junk", "{0 1}", "[0:x]", "[5:1]", "{0 1 1/3 2 1}"):
        with pytest.raises(FormatError):
            parse_vector(bad, sp)


@settings(max_examples=150)
@given(space_and_vectors())
def test_format_parse_round_trip(sv):
    space, v = sv
    assert parse_vector(format_vector(v), space) == v


@settings(max_examples=150)
@given(space_and_vectors())
def test_norm_contains_oracle(sv):
    _, v = sv
    for k in (0, 10, 30):
        enc = norm(v, k)
        assert enc.width <= Fraction(1, 2 ** k)
        assert mp_contains(enc, mp_norm(v))


@settings(max_examples=100)
@given(space_and_vectors())
def test_norm_pow_contains_oracle(sv):
    _, v = sv
    enc = norm_pow(v, 20)
    assert enc.width <= Fraction(1, 2 ** 20)
    assert mp_contains(enc, mp_pth_power(v))


@settings(max_examples=100)
@given(space_and_vectors(count=2))
def test_distance_symmetric_and_triangle(svv):
    _, f, g = svv
    assert distance(f, g, 12) == distance(g, f, 12)
    assert distance(f, f, 12).hi == 0
    h = f.scale(HALF) + g.scale(HALF)
    assert distance(f, g, 12).lo <= distance(f, h, 12).hi + distance(h, g, 12).hi


@settings(max_examples=100)
@given(space_and_vectors(count=2, exponents=(Fraction(1), Fraction(2), Fraction(3))))
def test_component_norm_identity_on_restrictions(svv):
    space, g, _ = svv
    f = LpVector(space, g.atomic, StepFunction()) if space.kind.has_atoms else g
    if space.kind.has_continuum:
        f = LpVector(space, f.atomic, g.continuous.restrict(0, HALF))
    assert is_component(f, g)
    assert pth_power_exact(g - f) + pth_power_exact(f) == pth_power_exact(g)


@given(st.data())
def test_disjoint_supports_add_pth_powers(data):
    space = LpSpace(Kind.LP_SUM, 3)
    f = data.draw(vectors(space))
    left = LpVector(space, f.atomic, f.continuous.restrict(0, HALF))
    right = LpVector(space, f.atomic.scale(0), f.continuous.restrict(HALF, 1))
    assert disjointly_supported(left, right)
    assert pth_power_exact(left + right) == pth_power_exact(left) + pth_power_exact(right)
