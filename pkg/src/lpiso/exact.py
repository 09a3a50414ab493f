"""Exact rationals and dyadic interval enclosures.

Rationals are :class:`fractions.Fraction`.  Every interval endpoint is a dyadic
rational (denominator a power of two), so outward rounding to a bit level ``k``
is a floor/ceil of ``q * 2**k``.  Real powers ``x**p`` are restricted to
rational exponents ``p = a/b`` and reduce to an exact integer power followed by
a certified integer ``b``-th root.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Union

from .errors import NegativeBase

RationalLike = Union[int, Fraction, str]

__all__ = [
    "DyadicInterval",
    "as_rational",
    "as_exponent",
    "is_dyadic",
    "floor_dyadic",
    "ceil_dyadic",
    "iroot",
    "root_bounds",
    "power_bounds",
    "interval_add",
    "interval_sub",
    "interval_mul",
    "pow_rational",
    "root_p",
    "format_rational",
]


def as_rational(q: RationalLike) -> Fraction:
    if isinstance(q, Fraction):
        return q
    if isinstance(q, (int, Rational)):
        return Fraction(q)
    if isinstance(q, str):
        return Fraction(q.strip())
    raise TypeError(f"not an exact rational: {q!r}")


def as_exponent(p: RationalLike) -> Fraction:
    """Validate an L^p exponent: an exact rational with ``p >= 1``."""
    if isinstance(p, float):
        raise TypeError("exponents must be exact rationals, not floats")
    p = as_rational(p)
    if p < 1:
        raise ValueError(f"exponent must satisfy p >= 1, got {p}")
    return p


def format_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def is_dyadic(q: Fraction) -> bool:
    d = q.denominator
    return d & (d - 1) == 0


def floor_dyadic(q: Fraction, k: int) -> Fraction:
    """Largest multiple of ``2**-k`` that is ``<= q``."""
    if k >= 0:
        return Fraction((q.numerator << k) // q.denominator, 1 << k)
    return Fraction(q.numerator // (q.denominator << -k) << -k)


def ceil_dyadic(q: Fraction, k: int) -> Fraction:
    return -floor_dyadic(-q, k)


def iroot(n: int, b: int) -> int:
    """Floor of the real ``b``-th root of a nonnegative integer."""
    if n < 0:
        raise NegativeBase(f"iroot of negative integer {n}")
    if b < 1:
        raise ValueError("root degree must be positive")
    if n < 2 or b == 1:
        return n
    # Newton from above: start at a power of two that is >= the root.
    x = 1 << -(-n.bit_length() // b)
    while True:
        y = ((b - 1) * x + n // x ** (b - 1)) // b
        if y >= x:
            break
        x = y
    while x ** b > n:
        x -= 1
    while (x + 1) ** b <= n:
        x += 1
    return x


def root_bounds(y: Fraction, b: int, k: int) -> tuple[Fraction, Fraction]:
    """Dyadic ``lo <= y**(1/b) <= hi`` with ``hi - lo <= 2**-k`` (``lo == hi`` when exact)."""
    if y < 0:
        raise NegativeBase(f"root of negative value {y}")
    if y == 0:
        return Fraction(0), Fraction(0)
    if b == 1:
        return floor_dyadic(y, k), ceil_dyadic(y, k)
    k = max(k, 0)
    num, den = y.numerator, y.denominator
    scaled = num << (k * b)
    m = iroot(scaled // den, b)
    lo = Fraction(m, 1 << k)
    if m ** b * den == scaled:
        return lo, lo
    return lo, Fraction(m + 1, 1 << k)


def power_bounds(y: Fraction, r: Fraction, k: int) -> tuple[Fraction, Fraction]:
    """Dyadic enclosure of ``y**r`` for rational ``y >= 0``, ``r > 0``; width <= 2**-k."""
    if y < 0:
        raise NegativeBase(f"power of negative value {y}")
    return root_bounds(y ** r.numerator, r.denominator, k)


@dataclass(frozen=True)
class DyadicInterval:
    """Closed interval ``[lo, hi]`` with dyadic endpoints.

    ``level`` records the precision the producer aimed for (width <= 2**-level);
    it is informational and does not participate in containment tests.
    """

    lo: Fraction
    hi: Fraction
    level: int = 0

    def __post_init__(self):
        lo, hi = as_rational(self.lo), as_rational(self.hi)
        if not (is_dyadic(lo) and is_dyadic(hi)):
            raise ValueError(f"interval endpoints must be dyadic: {lo}, {hi}")
        if lo > hi:
            raise ValueError(f"empty interval: lo={lo} > hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def point(cls, q: RationalLike, level: int = 0) -> DyadicInterval:
        q = as_rational(q)
        return cls(q, q, level)

    @classmethod
    def enclose(cls, q: RationalLike, k: int) -> DyadicInterval:
        """Tightest dyadic enclosure of a rational on the ``2**-k`` grid (exact if already dyadic)."""
        q = as_rational(q)
        if is_dyadic(q):
            return cls(q, q, k)
        return cls(floor_dyadic(q, k), ceil_dyadic(q, k), k)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x) -> bool:
        if isinstance(x, DyadicInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    __contains__ = contains

    def overlaps(self, other: DyadicInterval) -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def __add__(self, other):
        other = _coerce(other)
        return DyadicInterval(self.lo + other.lo, self.hi + other.hi, min(self.level, other.level))

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        return DyadicInterval(self.lo - other.hi, self.hi - other.lo, min(self.level, other.level))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __neg__(self):
        return DyadicInterval(-self.hi, -self.lo, self.level)

    def __mul__(self, other):
        other = _coerce(other)
        products = (self.lo * other.lo, self.lo * other.hi, self.hi * other.lo, self.hi * other.hi)
        return DyadicInterval(min(products), max(products), min(self.level, other.level))

    __rmul__ = __mul__

    def __abs__(self):
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return DyadicInterval(Fraction(0), max(-self.lo, self.hi), self.level)

    def round_out(self, k: int) -> DyadicInterval:
        return DyadicInterval(floor_dyadic(self.lo, k), ceil_dyadic(self.hi, k), k)

    def to_decimal(self, digits: int = 12) -> str:
        return f"{_decimal(self.lo, digits, up=False)}..{_decimal(self.hi, digits, up=True)} (width=2^-{self.level})"

    def to_dyadic(self) -> str:
        return f"{_dyadic_literal(self.lo)}..{_dyadic_literal(self.hi)} (width=2^-{self.level})"

    def __str__(self):
        return self.to_decimal()


def _coerce(x) -> DyadicInterval:
    if isinstance(x, DyadicInterval):
        return x
    q = as_rational(x)
    if not is_dyadic(q):
        raise ValueError(f"cannot coerce non-dyadic rational {q} to a point interval")
    return DyadicInterval(q, q, 0)


def _decimal(q: Fraction, digits: int, up: bool) -> str:
    scale = 10 ** digits
    n = q * scale
    v = -((-n.numerator) // n.denominator) if up else n.numerator // n.denominator
    sign = "-" if v < 0 else ""
    v = abs(v)
    whole, frac = divmod(v, scale)
    return f"{sign}{whole}.{frac:0{digits}d}"


def _dyadic_literal(q: Fraction) -> str:
    e = q.denominator.bit_length() - 1
    return f"{q.numerator}" if e == 0 else f"{q.numerator}*2^-{e}"


def interval_add(a: DyadicInterval, b: DyadicInterval) -> DyadicInterval:
    return a + b


def interval_sub(a: DyadicInterval, b: DyadicInterval) -> DyadicInterval:
    return a - b


def interval_mul(a: DyadicInterval, b: DyadicInterval) -> DyadicInterval:
    return a * b


def _positive_exponent(r: RationalLike) -> Fraction:
    if isinstance(r, float):
        raise TypeError("exponents must be exact rationals, not floats")
    r = as_rational(r)
    if r <= 0:
        raise ValueError(f"exponent must be positive, got {r}")
    return r


def _check_base(x: DyadicInterval):
    if x.lo < 0:
        raise NegativeBase(f"base interval reaches below zero: {x.lo}")


def pow_rational(x: DyadicInterval, p: RationalLike, k: int) -> DyadicInterval:
    """Enclosure of ``x**p`` for a positive rational ``p`` on ``[0, inf)``.

    Monotone interval extension: each endpoint is bounded separately, so a
    point input yields width ``<= 2**-k``.
    """
    _check_base(x)
    p = _positive_exponent(p)
    if x.is_point():
        lo, hi = power_bounds(x.lo, p, k)
    else:
        lo, _ = power_bounds(x.lo, p, k)
        _, hi = power_bounds(x.hi, p, k)
    return DyadicInterval(lo, hi, k)


def root_p(x: DyadicInterval, p: RationalLike, k: int) -> DyadicInterval:
    """Enclosure of ``x**(1/p)`` on ``[0, inf)``; width ``<= 2**-k`` for point inputs."""
    _check_base(x)
    inv = 1 / _positive_exponent(p)
    if x.is_point():
        lo, hi = power_bounds(x.lo, inv, k)
    else:
        lo, _ = power_bounds(x.lo, inv, k)
        _, hi = power_bounds(x.hi, inv, k)
    return DyadicInterval(lo, hi, k)
