"""Rational vectors of l^p_n, l^p, L^p[0,1] and their L^p-sums.

A vector is stored in canonical form: a finitely supported atomic part and a
step function on a dyadic partition of [0, 1].  Canonical forms make a.e.
equality decidable, so ``==`` on :class:`LpVector` is equality of vectors.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterator, Mapping, Optional

from .errors import FormatError, SpaceMismatch
from .exact import (
    DyadicInterval,
    as_exponent,
    as_rational,
    format_rational,
    is_dyadic,
    power_bounds,
    root_bounds,
)

__all__ = [
    "Kind",
    "LpSpace",
    "StepFunction",
    "SeqVector",
    "LpVector",
    "dyadic_interval",
    "standard_generator",
    "norm",
    "norm_pow",
    "pth_power_exact",
    "distance",
    "disjointly_supported",
    "is_component",
    "agrees_on_support",
    "add",
    "sub",
    "scale",
    "lp_sum_embed",
    "parse_vector",
    "format_vector",
]

ZERO = Fraction(0)
ONE = Fraction(1)


class Kind(str, Enum):
    LPN = "lp_n"
    LP = "lp"
    LP01 = "Lp01"
    LPN_SUM = "lpn_sum"
    LP_SUM = "lp_sum"

    @property
    def has_atoms(self) -> bool:
        return self is not Kind.LP01

    @property
    def has_continuum(self) -> bool:
        return self in (Kind.LP01, Kind.LPN_SUM, Kind.LP_SUM)

    @property
    def finite_atoms(self) -> bool:
        return self in (Kind.LPN, Kind.LPN_SUM)


@dataclass(frozen=True)
class LpSpace:
    """One of the five separable L^p space shapes with a fixed rational exponent."""

    kind: Kind
    p: Fraction
    n: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "p", as_exponent(self.p))
        if self.kind.finite_atoms:
            if self.n is None or self.n < 1:
                raise ValueError(f"{self.kind.value} needs a dimension n >= 1")
        elif self.n is not None:
            raise ValueError(f"{self.kind.value} takes no dimension")

    @property
    def integer_p(self) -> bool:
        return self.p.denominator == 1

    def zero(self) -> LpVector:
        return LpVector(self)

    def atom(self, i: int, coeff=ONE) -> LpVector:
        return LpVector(self, atomic=SeqVector.from_mapping({i: coeff}))

    def indicator(self, a, b, coeff=ONE) -> LpVector:
        return LpVector(self, continuous=StepFunction.indicator(a, b, coeff))

    def generator_count(self) -> Optional[int]:
        return self.n if self.kind is Kind.LPN else None

    def __str__(self):
        dim = f",n={self.n}" if self.n is not None else ""
        return f"{self.kind.value}(p={format_rational(self.p)}{dim})"


def dyadic_interval(index: int) -> tuple[Fraction, Fraction]:
    """Endpoints of D_index in the breadth-first enumeration D_0 = [0,1], D_1 = [0,1/2], D_2 = [1/2,1], ..."""
    if index < 0:
        raise IndexError(index)
    level = (index + 1).bit_length() - 1
    j = index + 1 - (1 << level)
    return Fraction(j, 1 << level), Fraction(j + 1, 1 << level)


def standard_generator(space: LpSpace, index: int) -> LpVector:
    """The index-th distinguished point of the standard presentation.

    Sums interleave as follows: ``lpn_sum`` lists the n atoms first and then the
    dyadic indicators; ``lp_sum`` alternates atom, indicator, atom, ...
    """
    kind = space.kind
    if index < 0:
        raise IndexError(index)
    if kind is Kind.LPN:
        if index >= space.n:
            raise IndexError(f"l^p_{space.n} has only {space.n} generators")
        return space.atom(index)
    if kind is Kind.LP:
        return space.atom(index)
    if kind is Kind.LP01:
        return space.indicator(*dyadic_interval(index))
    if kind is Kind.LPN_SUM:
        if index < space.n:
            return space.atom(index)
        return space.indicator(*dyadic_interval(index - space.n))
    half, odd = divmod(index, 2)
    return space.indicator(*dyadic_interval(half)) if odd else space.atom(half)


@dataclass(frozen=True)
class StepFunction:
    """Rational step function on a dyadic partition ``0 = t_0 < ... < t_m = 1``.

    ``values[i]`` is the value on ``[t_i, t_{i+1})``.  Adjacent equal values are
    merged, so the representation of an a.e.-class is unique.
    """

    breaks: tuple = (ZERO, ONE)
    values: tuple = (ZERO,)

    def __post_init__(self):
        breaks = tuple(as_rational(t) for t in self.breaks)
        values = tuple(as_rational(v) for v in self.values)
        if len(breaks) != len(values) + 1 or len(values) == 0:
            raise ValueError("need len(breaks) == len(values) + 1 >= 2")
        if breaks[0] != 0 or breaks[-1] != 1:
            raise ValueError("breakpoints must start at 0 and end at 1")
        for t in breaks:
            if not is_dyadic(t):
                raise ValueError(f"breakpoint {t} is not dyadic")
        if any(a >= b for a, b in zip(breaks, breaks[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        breaks, values = _merge_equal(breaks, values)
        object.__setattr__(self, "breaks", breaks)
        object.__setattr__(self, "values", values)

    @classmethod
    def indicator(cls, a, b, coeff=ONE) -> StepFunction:
        a, b, coeff = as_rational(a), as_rational(b), as_rational(coeff)
        if not (0 <= a < b <= 1):
            raise ValueError(f"bad interval [{a},{b}]")
        breaks, values = [ZERO], []
        if a > 0:
            breaks.append(a)
            values.append(ZERO)
        values.append(coeff)
        breaks.append(b)
        if b < 1:
            values.append(ZERO)
            breaks.append(ONE)
        return cls(tuple(breaks), tuple(values))

    def pieces(self) -> Iterator[tuple[Fraction, Fraction, Fraction]]:
        for i, v in enumerate(self.values):
            yield self.breaks[i], self.breaks[i + 1], v

    def is_zero(self) -> bool:
        return self.values == (ZERO,)

    def value_at(self, t) -> Fraction:
        i = bisect_right(self.breaks, t) - 1
        return self.values[min(max(i, 0), len(self.values) - 1)]

    def support(self) -> list[tuple[Fraction, Fraction]]:
        return [(a, b) for a, b, v in self.pieces() if v != 0]

    def combine(self, other: StepFunction, op) -> StepFunction:
        breaks = sorted(set(self.breaks) | set(other.breaks))
        values = []
        i = j = 0
        for t in breaks[:-1]:
            while self.breaks[i + 1] <= t:
                i += 1
            while other.breaks[j + 1] <= t:
                j += 1
            values.append(op(self.values[i], other.values[j]))
        return StepFunction(tuple(breaks), tuple(values))

    def __add__(self, other):
        return self.combine(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self.combine(other, lambda a, b: a - b)

    def scale(self, s) -> StepFunction:
        s = as_rational(s)
        if s == 0:
            return StepFunction()
        return StepFunction(self.breaks, tuple(s * v for v in self.values))

    def restrict(self, a, b) -> StepFunction:
        """This function times the indicator of [a, b]."""
        return self.combine(StepFunction.indicator(a, b), lambda x, y: x * y)


def _merge_equal(breaks, values):
    out_b, out_v = [breaks[0]], []
    for i, v in enumerate(values):
        if out_v and out_v[-1] == v:
            out_b[-1] = breaks[i + 1]
        else:
            out_v.append(v)
            out_b.append(breaks[i + 1])
    return tuple(out_b), tuple(out_v)


@dataclass(frozen=True)
class SeqVector:
    """Finitely supported rational sequence, stored as sorted ``(index, coeff)`` pairs without zeros."""

    coeffs: tuple = ()

    def __post_init__(self):
        cleaned = tuple(sorted((int(i), as_rational(q)) for i, q in self.coeffs if q != 0))
        idx = [i for i, _ in cleaned]
        if len(set(idx)) != len(idx):
            raise ValueError("duplicate indices in sequence vector")
        if idx and idx[0] < 0:
            raise ValueError("negative atom index")
        object.__setattr__(self, "coeffs", cleaned)

    @classmethod
    def from_mapping(cls, m: Mapping[int, object]) -> SeqVector:
        return cls(tuple(m.items()))

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.coeffs)

    def support(self) -> frozenset:
        return frozenset(i for i, _ in self.coeffs)

    def is_zero(self) -> bool:
        return not self.coeffs

    def __getitem__(self, i) -> Fraction:
        return self.as_dict().get(i, ZERO)

    def combine(self, other: SeqVector, op) -> SeqVector:
        a, b = self.as_dict(), other.as_dict()
        return SeqVector(tuple((i, op(a.get(i, ZERO), b.get(i, ZERO))) for i in set(a) | set(b)))

    def __add__(self, other):
        return self.combine(other, lambda x, y: x + y)

    def __sub__(self, other):
        return self.combine(other, lambda x, y: x - y)

    def scale(self, s) -> SeqVector:
        s = as_rational(s)
        return SeqVector(tuple((i, s * q) for i, q in self.coeffs))


@dataclass(frozen=True)
class LpVector:
    space: LpSpace
    atomic: SeqVector = field(default_factory=SeqVector)
    continuous: StepFunction = field(default_factory=StepFunction)

    def __post_init__(self):
        kind = self.space.kind
        if not self.atomic.is_zero():
            if not kind.has_atoms:
                raise SpaceMismatch(f"{self.space} has no atomic part")
            if kind.finite_atoms and max(self.atomic.support()) >= self.space.n:
                raise SpaceMismatch(f"atom index outside {self.space}")
        if not self.continuous.is_zero() and not kind.has_continuum:
            raise SpaceMismatch(f"{self.space} has no continuous part")

    def is_zero(self) -> bool:
        return self.atomic.is_zero() and self.continuous.is_zero()

    def _check(self, other: LpVector):
        if not isinstance(other, LpVector):
            raise TypeError(f"expected LpVector, got {type(other).__name__}")
        if other.space != self.space:
            raise SpaceMismatch(f"{self.space} vs {other.space}")

    def __add__(self, other):
        self._check(other)
        return LpVector(self.space, self.atomic + other.atomic, self.continuous + other.continuous)

    def __sub__(self, other):
        self._check(other)
        return LpVector(self.space, self.atomic - other.atomic, self.continuous - other.continuous)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, s) -> LpVector:
        return LpVector(self.space, self.atomic.scale(s), self.continuous.scale(s))

    def __rmul__(self, s):
        if isinstance(s, (int, Fraction)):
            return self.scale(s)
        return NotImplemented

    def atomic_part(self) -> LpVector:
        return LpVector(self.space, atomic=self.atomic)

    def continuous_part(self) -> LpVector:
        return LpVector(self.space, continuous=self.continuous)

    def is_atom(self) -> bool:
        """Support is a single atom of the measure space."""
        return len(self.atomic.support()) == 1 and self.continuous.is_zero()

    def weighted_magnitudes(self) -> Iterator[tuple[Fraction, Fraction]]:
        """``(|value|, weight)`` pairs whose p-th power sum is the p-th power norm."""
        for _, q in self.atomic.coeffs:
            yield abs(q), ONE
        for a, b, v in self.continuous.pieces():
            if v != 0:
                yield abs(v), b - a

    def __str__(self):
        return format_vector(self)


def add(f: LpVector, g: LpVector) -> LpVector:
    return f + g


def sub(f: LpVector, g: LpVector) -> LpVector:
    return f - g


def scale(s, f: LpVector) -> LpVector:
    return f.scale(s)


def lp_sum_embed(u: LpVector, v: LpVector) -> LpVector:
    """The pair ``(u, v)`` in ``l^p(_n) (+)_p L^p[0,1]``."""
    if u.space.kind not in (Kind.LPN, Kind.LP):
        raise SpaceMismatch(f"first summand must be atomic, got {u.space}")
    if v.space.kind is not Kind.LP01:
        raise SpaceMismatch(f"second summand must be L^p[0,1], got {v.space}")
    if u.space.p != v.space.p:
        raise SpaceMismatch(f"exponents differ: {u.space.p} vs {v.space.p}")
    if u.space.kind is Kind.LPN:
        target = LpSpace(Kind.LPN_SUM, u.space.p, u.space.n)
    else:
        target = LpSpace(Kind.LP_SUM, u.space.p)
    return LpVector(target, u.atomic, v.continuous)


def pth_power_exact(v: LpVector) -> Fraction:
    """``||v||_p^p`` as an exact rational; only defined for integer p."""
    p = v.space.p
    if p.denominator != 1:
        raise ValueError(f"exact p-th power needs integer p, got {p}")
    e = p.numerator
    return sum((m ** e * w for m, w in v.weighted_magnitudes()), ZERO)


def _pth_power_bounds(v: LpVector, w: int) -> tuple[Fraction, Fraction]:
    p = v.space.p
    if p.denominator == 1:
        s = pth_power_exact(v)
        return s, s
    lo = hi = ZERO
    for m, weight in v.weighted_magnitudes():
        a, b = power_bounds(m, p, w)
        lo += a * weight
        hi += b * weight
    return lo, hi


def norm_pow(v: LpVector, k: int) -> DyadicInterval:
    """Enclosure of ``||v||_p^p`` with width ``<= 2**-k``."""
    p = v.space.p
    if p.denominator == 1:
        return DyadicInterval.enclose(pth_power_exact(v), k)
    count = sum(1 for _ in v.weighted_magnitudes())
    # each term is off by at most 2**-w times a weight <= 1
    w = max(k, 0) + count.bit_length() + 1
    lo, hi = _pth_power_bounds(v, w)
    return DyadicInterval(lo, hi, k)


def norm(v: LpVector, k: int) -> DyadicInterval:
    """Enclosure of ``||v||_p`` with width ``<= 2**-k``."""
    p = v.space.p
    if v.is_zero():
        return DyadicInterval(ZERO, ZERO, k)
    if p.denominator == 1:
        lo, hi = root_bounds(pth_power_exact(v), p.numerator, k)
        return DyadicInterval(lo, hi, k)
    inv = 1 / p
    target = Fraction(1, 1 << k) if k >= 0 else Fraction(1 << -k)
    w = max(k, 0) + 8
    while True:
        s_lo, s_hi = _pth_power_bounds(v, w)
        lo, _ = power_bounds(s_lo, inv, k + 2)
        _, hi = power_bounds(s_hi, inv, k + 2)
        if hi - lo <= target:
            return DyadicInterval(lo, hi, k)
        w *= 2


def distance(f: LpVector, g: LpVector, k: int) -> DyadicInterval:
    # order-independent so that d(f, g) and d(g, f) return identical intervals
    return norm(f - g, k)


def _intervals_overlap(xs, ys) -> bool:
    """Two sorted lists of half-open pieces overlap in positive measure."""
    i = j = 0
    while i < len(xs) and j < len(ys):
        a0, a1 = xs[i]
        b0, b1 = ys[j]
        if max(a0, b0) < min(a1, b1):
            return True
        if a1 <= b1:
            i += 1
        else:
            j += 1
    return False


def disjointly_supported(f: LpVector, g: LpVector) -> bool:
    """``f * g == 0`` almost everywhere; shared endpoints have measure zero."""
    f._check(g)
    if f.atomic.support() & g.atomic.support():
        return False
    return not _intervals_overlap(f.continuous.support(), g.continuous.support())


def is_component(f: LpVector, g: LpVector) -> bool:
    """``f`` is a component of ``g``: ``g - f`` and ``f`` are disjointly supported."""
    f._check(g)
    return disjointly_supported(g - f, f)


def agrees_on_support(f: LpVector, g: LpVector) -> bool:
    """``f = g * 1_A`` with ``A = supp(f)``; the restriction form of the component order."""
    f._check(g)
    gd = g.atomic.as_dict()
    if any(gd.get(i) != q for i, q in f.atomic.coeffs):
        return False
    for a, b, v in f.continuous.pieces():
        if v == 0:
            continue
        if g.continuous.restrict(a, b) != StepFunction.indicator(a, b, v):
            return False
    return True


# ---------------------------------------------------------------------------
# text syntax:  atomic part "[i:q, ...]", step part "{t0 q0 t1 q1 ... 1}"

_ATOMIC_RE = re.compile(r"\[([^\]]*)\]")
_STEP_RE = re.compile(r"\{([^}]*)\}")


def format_vector(v: LpVector) -> str:
    parts = []
    if v.space.kind.has_atoms:
        parts.append("[" + ", ".join(f"{i}:{format_rational(q)}" for i, q in v.atomic.coeffs) + "]")
    if v.space.kind.has_continuum:
        tokens = []
        for t, q in zip(v.continuous.breaks, v.continuous.values):
            tokens += [format_rational(t), format_rational(q)]
        tokens.append("1")
        parts.append("{" + " ".join(tokens) + "}")
    return " ".join(parts)


def parse_vector(text: str, space: LpSpace) -> LpVector:
    text = text.strip()
    atomic, continuous = SeqVector(), StepFunction()
    try:
        m = _ATOMIC_RE.search(text)
        if m:
            pairs = []
            for item in filter(None, (s.strip() for s in m.group(1).split(","))):
                i, q = item.split(":")
                pairs.append((int(i), Fraction(q.strip())))
            atomic = SeqVector(tuple(pairs))
        s = _STEP_RE.search(text)
        if s:
            tokens = s.group(1).split()
            if len(tokens) < 3 or len(tokens) % 2 == 0:
                raise FormatError(f"step literal needs t0 q0 ... 1: {s.group(0)!r}")
            breaks = [Fraction(t) for t in tokens[0::2]]
            values = [Fraction(q) for q in tokens[1::2]]
            continuous = StepFunction(tuple(breaks), tuple(values))
        leftover = _STEP_RE.sub("", _ATOMIC_RE.sub("", text)).strip()
        if leftover or not (m or s):
            raise FormatError(f"unparseable vector literal {text!r}")
        return LpVector(space, atomic, continuous)
    except FormatError:
        raise
    except (ValueError, ZeroDivisionError, SpaceMismatch) as exc:
        raise FormatError(f"bad vector literal {text!r}: {exc}") from exc
