import itertools
from fractions import Fraction

import mpmath
import pytest
from hypothesis import strategies as st

from lpiso.lebesgue import Kind, LpSpace, LpVector, SeqVector, StepFunction, distance
from lpiso.pi01 import IsometryTable, TermMaps
from lpiso.signature import FiniteMetricPresentation, StandardPresentation
from lpiso.synthesis import standard_term

EXPONENTS = (Fraction(1), Fraction(3, 2), Fraction(3))

coefficients = st.fractions(min_value=-8, max_value=8, max_denominator=16)
nonzero_coefficients = coefficients.filter(lambda q: q != 0)
breakpoints = st.integers(min_value=0, max_value=64).map(lambda i: Fraction(i, 64))


def spaces(kinds=tuple(Kind), exponents=EXPONENTS):
    @st.composite
    def build(draw):
        kind = draw(st.sampled_from(kinds))
        p = draw(st.sampled_from(exponents))
        n = draw(st.integers(1, 5)) if kind.finite_atoms else None
        return LpSpace(kind, p, n)

    return build()


@st.composite
def step_functions(draw, max_pieces=5):
    cuts = sorted(set(draw(st.lists(breakpoints, min_size=1, max_size=max_pieces + 1))))
    pieces = []
    for a, b in zip(cuts, cuts[1:]):
        pieces.append((a, b, draw(coefficients)))
    f = StepFunction()
    for a, b, c in pieces:
        f = f + StepFunction.indicator(a, b, c)
    return f


@st.composite
def vectors(draw, space):
    atomic = SeqVector()
    continuous = StepFunction()
    if space.kind.has_atoms:
        top = space.n if space.kind.finite_atoms else 12
        keys = draw(st.lists(st.integers(0, top - 1), max_size=4, unique=True))
        atomic = SeqVector.from_mapping({i: draw(coefficients) for i in keys})
    if space.kind.has_continuum:
        continuous = draw(step_functions())
    return LpVector(space, atomic, continuous)


@st.composite
def space_and_vectors(draw, count=1, kinds=tuple(Kind), exponents=EXPONENTS):
    space = draw(spaces(kinds, exponents))
    return (space,) + tuple(draw(vectors(space)) for _ in range(count))


def mp_pth_power(v: LpVector):
    """Independent oracle for ||v||_p^p using mpmath at 80 digits."""
    with mpmath.workdps(80):
        p = mpmath.mpf(v.space.p.numerator) / v.space.p.denominator
        total = mpmath.mpf(0)
        for _, c in v.atomic.coeffs:
            total += mpmath.power(abs(mpmath.mpf(c.numerator) / c.denominator), p)
        for a, b, c in v.continuous.pieces():
            width = mpmath.mpf((b - a).numerator) / (b - a).denominator
            total += width * mpmath.power(abs(mpmath.mpf(c.numerator) / c.denominator), p)
        return total


def mp_norm(v: LpVector):
    with mpmath.workdps(80):
        p = mpmath.mpf(v.space.p.numerator) / v.space.p.denominator
        return mpmath.power(mp_pth_power(v), 1 / p)


def mp_contains(interval, x, slack=mpmath.mpf(10) ** -60) -> bool:
    """Containment up to the oracle's own rounding error."""
    with mpmath.workdps(80):
        lo = mpmath.mpf(interval.lo.numerator) / interval.lo.denominator
        hi = mpmath.mpf(interval.hi.numerator) / interval.hi.denominator
        return lo - slack <= x <= hi + slack


def space_identity_table(P0, P1, depth):
    """Table of the map x -> x from a standard presentation to a scrambled one.

    Indices are computed by writing each point as a term in the other
    presentation's generators.  Rows are kept only where the conditions up to
    ``depth`` can look them up; all other rows stay undefined.
    """
    hidden_inv = P1.hidden.inverse()

    def f(m):
        return P1.index_of(standard_term(hidden_inv(P0.point(m))))

    def g(m):
        return P0.index_of(standard_term(P1.point(m)))

    tm = TermMaps(P0, P1)
    R = range(depth + 1)
    f_rows, g_rows = set(R), set(R)
    for m in R:
        g_rows.add(f(m))
        f_rows.add(g(m))
    for sym, arity in tm.operations:
        for js in itertools.product(R, repeat=arity):
            f_rows.add(tm.zeta(sym, js))
            g_rows.add(tm.zeta_prime(sym, js))
    for c in tm.constants:
        for j in R:
            f_rows.add(tm.zeta_c(c, j))
            g_rows.add(tm.zeta_c_prime(c, j))
    cols = depth + 1
    table = IsometryTable({m: (f(m),) * cols for m in f_rows}, {m: (g(m),) * cols for m in g_rows},
                          max(f_rows | g_rows) + 1, cols)
    return table, tm


def perturbed_metric_pair(space, n, shift=Fraction(1, 2)):
    """The first ``n`` standard points of ``space`` and the same points with every distance raised by ``shift``."""
    P = StandardPresentation(space)
    pts = [P.point(i) for i in range(n)]
    d = [[distance(a, b, 30).lo for b in pts] for a in pts]
    bumped = [[d[i][j] + (shift if i != j else 0) for j in range(n)] for i in range(n)]
    return FiniteMetricPresentation(d), FiniteMetricPresentation(bumped)


@pytest.fixture
def l1_2():
    return LpSpace(Kind.LPN, 1, 2)
