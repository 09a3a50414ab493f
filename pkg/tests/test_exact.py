from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from lpiso.errors import NegativeBase
from lpiso.exact import (
    DyadicInterval,
    as_exponent,
    ceil_dyadic,
    floor_dyadic,
    iroot,
    power_bounds,
    pow_rational,
    root_bounds,
    root_p,
)

from conftest import mp_contains


def bisect_power(y: Fraction, r: Fraction, bits: int = 60) -> tuple[Fraction, Fraction]:
    """Oracle: bracket y**r by bisection on x**den <= y**num, 2**-bits wide."""
    target = y ** r.numerator
    lo, hi = Fraction(0), Fraction(1)
    while hi ** r.denominator <= target:
        hi *= 2
    for _ in range(bits + hi.numerator.bit_length()):
        mid = (lo + hi) / 2
        if mid ** r.denominator <= target:
            lo = mid
        else:
            hi = mid
    return lo, hi


def test_interval_add_exact():
    assert DyadicInterval.point(1) + DyadicInterval.point(2) == DyadicInterval(3, 3)


def test_zero_annihilates():
    x = DyadicInterval(Fraction(-3, 4), Fraction(5, 2))
    z = DyadicInterval.point(0) * x
    assert (z.lo, z.hi) == (0, 0)


def test_subtraction_endpoints():
    d = DyadicInterval(1, Fraction(3, 2)) - DyadicInterval(Fraction(1, 4), Fraction(1, 2))
    assert (d.lo, d.hi) == (Fraction(1, 2), Fraction(5, 4))


def test_integer_power_is_exact():
    y = pow_rational(DyadicInterval.point(2), 3, 10)
    assert (y.lo, y.hi) == (8, 8)


@pytest.mark.parametrize("p", [Fraction(1, 3), Fraction(3, 2), 1, 7])
def test_power_of_one(p):
    y = pow_rational(DyadicInterval.point(1), p, 10)
    assert (y.lo, y.hi) == (1, 1)


def test_cube_root_exponent_against_bisection_oracle():
    y = pow_rational(DyadicInterval.point(Fraction(1, 2)), Fraction(1, 3), 20)
    lo, hi = bisect_power(Fraction(1, 2), Fraction(1, 3))
    assert y.width <= Fraction(1, 2 ** 20)
    assert y.lo <= lo and hi <= y.hi
    assert float(y.mid) == pytest.approx(0.7937005259840998, abs=1e-6)


def test_perfect_square_root():
    r = root_p(DyadicInterval.point(25), 2, 20)
    assert 5 in r and r.width <= Fraction(1, 2 ** 20)


def test_root_of_zero():
    r = root_p(DyadicInterval.point(0), 3, 5)
    assert (r.lo, r.hi) == (0, 0)


def test_cube_root_of_two():
    r = root_p(DyadicInterval.point(2), 3, 20)
    lo, hi = bisect_power(Fraction(2), Fraction(1, 3))
    assert r.lo <= lo and hi <= r.hi
    assert r.width <= Fraction(1, 2 ** 20)
    with mpmath.workdps(40):
        assert mp_contains(r, mpmath.cbrt(2))


def test_negative_base_raises():
    with pytest.raises(NegativeBase):
        root_p(DyadicInterval(Fraction(-1, 2), 1), 2, 5)
    with pytest.raises(NegativeBase):
        iroot(-4, 2)


def test_exponent_must_be_positive():
    with pytest.raises(ValueError):
        as_exponent(0)


@given(st.integers(0, 10 ** 30), st.integers(1, 9))
def test_iroot_brackets(n, b):
    x = iroot(n, b)
    assert x ** b <= n < (x + 1) ** b


@settings(max_examples=200)
@given(
    st.fractions(min_value=0, max_value=1000, max_denominator=10 ** 6),
    st.sampled_from([Fraction(1), Fraction(3, 2), Fraction(3), Fraction(1, 3), Fraction(2, 5)]),
    st.integers(0, 40),
)
def test_power_bounds_bracket_exactly(y, r, k):
    lo, hi = power_bounds(y, r, k)
    # y**r lies in [lo, hi] iff lo**den <= y**num <= hi**den
    assert lo ** r.denominator <= y ** r.numerator <= hi ** r.denominator
    assert hi - lo <= Fraction(1, 2 ** k)
    olo, ohi = bisect_power(y, r)
    assert lo <= ohi and olo <= hi


@given(st.fractions(min_value=0, max_value=100, max_denominator=1000), st.integers(1, 6), st.integers(0, 30))
def test_root_bounds_property(y, b, k):
    lo, hi = root_bounds(y, b, k)
    assert lo ** b <= y <= hi ** b
    assert hi - lo <= Fraction(1, 2 ** k)


@given(st.fractions(max_denominator=1000), st.integers(-4, 30))
def test_dyadic_rounding(q, k):
    lo, hi = floor_dyadic(q, k), ceil_dyadic(q, k)
    assert lo <= q <= hi and hi - lo <= Fraction(2) ** -k


@given(
    st.fractions(min_value=-10, max_value=10, max_denominator=64),
    st.fractions(min_value=0, max_value=5, max_denominator=64),
    st.fractions(min_value=-10, max_value=10, max_denominator=64),
    st.fractions(min_value=0, max_value=5, max_denominator=64),
)
def test_arithmetic_is_inclusion_monotone(a, wa, b, wb):
    x = DyadicInterval(floor_dyadic(a, 8), ceil_dyadic(a + wa, 8))
    y = DyadicInterval(floor_dyadic(b, 8), ceil_dyadic(b + wb, 8))
    for s in (x.lo, x.mid, x.hi):
        for t in (y.lo, y.mid, y.hi):
            assert s + t in x + y
            assert s - t in x - y
            assert s * t in x * y
