"""Metric signatures, presentations and the frozen numbering of rational points.

Rational points of a Banach presentation are *terms*: finite rational linear
combinations of distinguished points, written as sorted ``(generator, coeff)``
tuples.  :func:`term_index` / :func:`term_from_index` give a computable
bijection between terms and natural numbers:

* index 0 is the zero term;
* for ``i >= 1`` the support bitmask ``S`` and the coefficient codes are paired:
  ``i - 1 = cantor(mask - 1, pack(codes))`` with infinitely many generators,
  ``i - 1 = pack(codes) * (2**n - 1) + (mask - 1)`` with ``n`` generators;
* ``pack`` is a balanced Cantor pairing of the coefficient codes in generator
  order; a nonzero rational ``q`` has code ``2*rank(|q|) + (q < 0)``;
* a positive rational with canonical continued fraction ``[a0; a1, ..., an]``
  (``an >= 2`` when ``n >= 1``) has rank ``cantor(n, pack(shifted))`` where
  ``shifted`` subtracts the least admissible value from each partial quotient.
  Ranks begin ``1, 1/2, 2, 2/3, 3/2, 3, ...`` and cost time linear in the
  size of the continued fraction.

With this order the standard l^1 presentation starts ``0, e_0, e_1, -e_0, ...``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Optional, Sequence

from .exact import DyadicInterval, as_rational, format_rational
from .lebesgue import LpSpace, LpVector, distance, norm, standard_generator

__all__ = [
    "Signature",
    "BANACH",
    "METRIC",
    "Term",
    "term_add",
    "term_scale",
    "term_index",
    "term_from_index",
    "rational_rank",
    "rational_from_rank",
    "Presentation",
    "BanachPresentation",
    "StandardPresentation",
    "FiniteMetricPresentation",
    "enumerate_rational_points",
    "eval_metric",
    "ModulusReport",
    "check_modulus",
    "format_term",
]

Term = tuple  # tuple[tuple[int, Fraction], ...], sorted by generator, no zeros
ZERO_TERM: Term = ()


# ---------------------------------------------------------------------------
# signatures


def _ceil_log2(q: Fraction) -> int:
    """Smallest e with 2**e >= q, for q > 0."""
    e = q.numerator.bit_length() - q.denominator.bit_length()
    while Fraction(2) ** e < q:
        e += 1
    while Fraction(2) ** (e - 1) >= q:
        e -= 1
    return e


def parse_scalar_symbol(symbol: str) -> Optional[Fraction]:
    if symbol.startswith("*"):
        try:
            return Fraction(symbol[1:])
        except (ValueError, ZeroDivisionError):
            return None
    return None


@dataclass(frozen=True)
class Signature:
    """A metric signature: symbols with arities and a modulus per operation/functional.

    ``scalar_family`` adds the unary operations ``*s`` for every rational ``s``.
    """

    name: str
    operations: tuple = ()
    functionals: tuple = ()
    constants: tuple = ()
    moduli: dict = field(default_factory=dict, compare=False, hash=False)
    scalar_family: bool = False

    def __post_init__(self):
        for sym, arity in self.operations + self.functionals:
            if arity < 1:
                raise ValueError(f"symbol {sym!r} needs positive arity")
            if sym not in self.moduli:
                raise ValueError(f"no modulus for {sym!r}")

    def kind(self, symbol: str) -> str:
        if symbol in dict(self.operations):
            return "operation"
        if self.scalar_family and parse_scalar_symbol(symbol) is not None:
            return "operation"
        if symbol in dict(self.functionals):
            return "functional"
        if symbol in self.constants:
            return "constant"
        raise KeyError(f"{symbol!r} is not a symbol of signature {self.name}")

    def kind_or_none(self, symbol: str) -> Optional[str]:
        try:
            return self.kind(symbol)
        except KeyError:
            return None

    def arity(self, symbol: str) -> int:
        table = dict(self.operations + self.functionals)
        if symbol in table:
            return table[symbol]
        if self.kind(symbol) == "constant":
            return 0
        return 1

    def modulus(self, symbol: str, m: int) -> int:
        if symbol in self.moduli:
            return self.moduli[symbol](m)
        s = parse_scalar_symbol(symbol) if self.scalar_family else None
        if s is None:
            raise KeyError(f"{symbol!r} has no modulus in {self.name}")
        return m + 1 + (max(0, _ceil_log2(abs(s))) if s != 0 else 0)


# Strict moduli: each gives output distance <= 2**-(m+1) < 2**-m.
BANACH = Signature(
    name="banach",
    operations=(("+", 2),),
    functionals=(("norm", 1),),
    constants=("0",),
    moduli={"+": lambda m: m + 2, "norm": lambda m: m + 1},
    scalar_family=True,
)

METRIC = Signature(name="metric")


# ---------------------------------------------------------------------------
# terms


def make_term(coeffs) -> Term:
    acc: dict[int, Fraction] = {}
    for i, q in coeffs:
        acc[int(i)] = acc.get(int(i), Fraction(0)) + as_rational(q)
    return tuple(sorted((i, q) for i, q in acc.items() if q != 0))


def term_add(a: Term, b: Term) -> Term:
    return make_term(a + b)


def term_scale(s, a: Term) -> Term:
    s = as_rational(s)
    return make_term((i, s * q) for i, q in a)


def format_term(t: Term) -> str:
    if not t:
        return "0"
    return " + ".join(f"{format_rational(q)}*g{i}" for i, q in t)


def _continued_fraction(q: Fraction) -> list[int]:
    a, b, out = q.numerator, q.denominator, []
    while b:
        t, r = divmod(a, b)
        out.append(t)
        a, b = b, r
    return out


def rational_rank(q: Fraction) -> int:
    """Rank of a positive rational in the continued-fraction order (1 -> 0, 1/2 -> 1, 2 -> 2, ...)."""
    q = as_rational(q)
    if q <= 0:
        raise ValueError("rank is defined for positive rationals")
    cf = _continued_fraction(q)
    n = len(cf) - 1
    if n == 0:
        return cantor(0, cf[0] - 1)
    shifted = [cf[0]] + [a - 1 for a in cf[1:-1]] + [cf[-1] - 2]
    return cantor(n, pack(shifted))


def rational_from_rank(r: int) -> Fraction:
    if r < 0:
        raise ValueError("negative rank")
    n, code = uncantor(r)
    if n == 0:
        return Fraction(code + 1)
    shifted = unpack(code, n + 1)
    cf = [shifted[0]] + [a + 1 for a in shifted[1:-1]] + [shifted[-1] + 2]
    q = Fraction(cf[-1])
    for a in reversed(cf[:-1]):
        q = a + 1 / q
    return q


def coeff_code(q: Fraction) -> int:
    return 2 * rational_rank(abs(q)) + (1 if q < 0 else 0)


def coeff_from_code(c: int) -> Fraction:
    r, neg = divmod(c, 2)
    q = rational_from_rank(r)
    return -q if neg else q


def cantor(a: int, b: int) -> int:
    return (a + b) * (a + b + 1) // 2 + b


def uncantor(z: int) -> tuple[int, int]:
    w = (math.isqrt(8 * z + 1) - 1) // 2
    b = z - w * (w + 1) // 2
    return w - b, b


def pack(codes: Sequence[int]) -> int:
    if len(codes) == 1:
        return codes[0]
    mid = (len(codes) + 1) // 2
    return cantor(pack(codes[:mid]), pack(codes[mid:]))


def unpack(z: int, length: int) -> list[int]:
    if length == 1:
        return [z]
    mid = (length + 1) // 2
    a, b = uncantor(z)
    return unpack(a, mid) + unpack(b, length - mid)


def term_index(t: Term, generators: Optional[int] = None) -> int:
    if not t:
        return 0
    mask = 0
    for i, _ in t:
        if generators is not None and i >= generators:
            raise IndexError(f"generator {i} out of range {generators}")
        mask |= 1 << i
    code = pack([coeff_code(q) for _, q in t])
    if generators is None:
        return 1 + cantor(mask - 1, code)
    return 1 + code * ((1 << generators) - 1) + (mask - 1)


def term_from_index(index: int, generators: Optional[int] = None) -> Term:
    if index < 0:
        raise IndexError(index)
    if index == 0:
        return ZERO_TERM
    if generators is None:
        a, code = uncantor(index - 1)
    else:
        code, a = divmod(index - 1, (1 << generators) - 1)
    mask = a + 1
    gens = [i for i in range(mask.bit_length()) if mask >> i & 1]
    codes = unpack(code, len(gens))
    return tuple((g, coeff_from_code(c)) for g, c in zip(gens, codes))


# ---------------------------------------------------------------------------
# presentations


class Presentation:
    """A structure with an indexed generating sequence and evaluators at precision k.

    Subclasses provide ``point(index)`` (the rational point as a concrete value)
    and ``_distance(a, b, k)``.  Indices always refer to the frozen numbering of
    rational points.
    """

    signature: Signature = METRIC

    def point(self, index: int):
        raise NotImplementedError

    def term(self, index: int):
        raise NotImplementedError

    def index_of(self, term) -> int:
        raise NotImplementedError

    def enumerate_rational_points(self, bound: int) -> list:
        return [self.term(i) for i in range(bound)]

    def eval_metric(self, i: int, j: int, k: int) -> DyadicInterval:
        a, b = (i, j) if i <= j else (j, i)
        return self._distance(self.point(a), self.point(b), k)

    def distance_between(self, a, b, k: int) -> DyadicInterval:
        return self._distance(a, b, k)

    def _distance(self, a, b, k):
        raise NotImplementedError

    def eval_functional(self, symbol: str, indices: Sequence[int], k: int) -> DyadicInterval:
        raise KeyError(f"no functional {symbol!r} in signature {self.signature.name}")

    def apply(self, symbol: str, indices: Sequence[int]) -> int:
        """Index of ``symbol(x_{i1}, ..., x_{in})``."""
        raise KeyError(f"no operation {symbol!r} in signature {self.signature.name}")

    def constant_index(self, symbol: str, j: int) -> int:
        """Index of a rational point within 2**-j of the constant."""
        raise KeyError(f"no constant {symbol!r} in signature {self.signature.name}")


class BanachPresentation(Presentation):
    """Presentation of an L^p space by a generator sequence of concrete vectors.

    ``generator`` maps an index to the vector of the index-th distinguished point;
    ``generator_count`` is ``None`` for infinite sequences.
    """

    signature = BANACH

    def __init__(self, space: LpSpace, generator: Callable[[int], LpVector],
                 generator_count: Optional[int] = None, name: str = "banach"):
        self.space = space
        self._generator = generator
        self.generator_count = generator_count
        self.name = name
        self._gen_cache = lru_cache(maxsize=None)(generator)
        self._point_cache = lru_cache(maxsize=4096)(self._eval_index)

    def generator(self, i: int) -> LpVector:
        if self.generator_count is not None and not 0 <= i < self.generator_count:
            raise IndexError(f"generator {i} out of range")
        return self._gen_cache(i)

    def term(self, index: int) -> Term:
        return term_from_index(index, self.generator_count)

    def index_of(self, term: Term) -> int:
        return term_index(make_term(term), self.generator_count)

    def evaluate(self, term: Term) -> LpVector:
        v = self.space.zero()
        for i, q in term:
            v = v + self.generator(i).scale(q)
        return v

    def _eval_index(self, index: int) -> LpVector:
        return self.evaluate(self.term(index))

    def point(self, index: int) -> LpVector:
        return self._point_cache(index)

    def _distance(self, a, b, k):
        return distance(a, b, k)

    def eval_functional(self, symbol, indices, k):
        if symbol != "norm" or len(indices) != 1:
            return super().eval_functional(symbol, indices, k)
        return norm(self.point(indices[0]), k)

    def functional_value(self, symbol: str, args: Sequence[LpVector], k: int) -> DyadicInterval:
        if symbol != "norm" or len(args) != 1:
            raise KeyError(symbol)
        return norm(args[0], k)

    def apply(self, symbol, indices):
        terms = [self.term(i) for i in indices]
        if symbol == "+" and len(terms) == 2:
            return self.index_of(term_add(*terms))
        s = parse_scalar_symbol(symbol)
        if s is not None and len(terms) == 1:
            return self.index_of(term_scale(s, terms[0]))
        return super().apply(symbol, indices)

    def apply_vectors(self, symbol: str, args: Sequence[LpVector]) -> LpVector:
        if symbol == "+":
            return args[0] + args[1]
        s = parse_scalar_symbol(symbol)
        if s is not None:
            return args[0].scale(s)
        raise KeyError(symbol)

    def constant_index(self, symbol, j):
        if symbol != "0":
            return super().constant_index(symbol, j)
        return 0

    def constant_value(self, symbol: str) -> LpVector:
        if symbol != "0":
            raise KeyError(symbol)
        return self.space.zero()

    def __repr__(self):
        return f"{type(self).__name__}({self.space}, {self.name})"


class StandardPresentation(BanachPresentation):
    """Standard basis / dyadic-indicator presentation of one of the five space shapes."""

    def __init__(self, space: LpSpace):
        super().__init__(space, lambda i: standard_generator(space, i),
                         space.generator_count(), name="standard")


class FiniteMetricPresentation(Presentation):
    """A finite metric space over the bare metric signature; rational points are the points."""

    signature = METRIC

    def __init__(self, distances: Sequence[Sequence], name: str = "finite_metric"):
        rows = [[as_rational(x) for x in row] for row in distances]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("distance table must be square")
        for i in range(n):
            if rows[i][i] != 0:
                raise ValueError(f"d({i},{i}) != 0")
            for j in range(n):
                if rows[i][j] != rows[j][i]:
                    raise ValueError(f"asymmetric distance at ({i},{j})")
                if i != j and rows[i][j] <= 0:
                    raise ValueError(f"nonpositive distance at ({i},{j})")
        self.table = tuple(tuple(r) for r in rows)
        self.size = n
        self.name = name

    def point(self, index):
        if not 0 <= index < self.size:
            raise IndexError(f"point {index} out of range {self.size}")
        return index

    def term(self, index):
        return self.point(index)

    def index_of(self, term):
        return self.point(term)

    def enumerate_rational_points(self, bound):
        return list(range(min(bound, self.size)))

    def _distance(self, a, b, k):
        return DyadicInterval.enclose(self.table[a][b], k)

    def satisfies_triangle(self) -> bool:
        n, d = self.size, self.table
        return all(d[i][k] <= d[i][j] + d[j][k] for i in range(n) for j in range(n) for k in range(n))

    def __repr__(self):
        return f"FiniteMetricPresentation(size={self.size}, {self.name})"


def enumerate_rational_points(P: Presentation, bound: int) -> list:
    if bound < 0:
        raise ValueError("bound must be >= 0")
    return P.enumerate_rational_points(bound)


def eval_metric(P: Presentation, i: int, j: int, k: int) -> DyadicInterval:
    return P.eval_metric(i, j, k)


# ---------------------------------------------------------------------------
# modulus checking


@dataclass
class ModulusReport:
    symbol: str
    samples: int
    violations: list = field(default_factory=list)
    inconclusive: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        return (f"modulus {self.symbol}: samples={self.samples} "
                f"violations={len(self.violations)} inconclusive={self.inconclusive}")


def _unit_perturbation(P: BanachPresentation, rng: random.Random, radius: Fraction, pool: int):
    """A rational vector with certified norm <= radius (often exactly radius)."""
    while True:
        w = P.point(rng.randrange(1, pool))
        if not w.is_zero():
            break
    upper = norm(w, 40).hi
    return w.scale(radius / upper)


def check_modulus(P: BanachPresentation, symbol: str, modulus: Callable[[int], int],
                  samples: int = 100, k_max: int = 8, seed: int = 0, pool: int = 64,
                  inclusive: bool = True) -> ModulusReport:
    """Sample inputs within ``2**-modulus(k)`` and certify the output moves less than ``2**-k``.

    A certified violation (output enclosure lower bound >= 2**-k) is recorded as a
    counterexample; enclosures straddling the threshold count as inconclusive.
    Half of the multi-argument samples perturb every argument in the same
    direction, which is where additive moduli are tight.

    With ``inclusive`` the input ball is closed (distance ``<= 2**-modulus(k)``),
    so boundary points are sampled; otherwise inputs stay strictly inside.
    """
    sig = P.signature
    kind = sig.kind(symbol)
    if kind == "constant":
        raise ValueError("constants have no modulus")
    arity = sig.arity(symbol)
    rng = random.Random(seed)
    report = ModulusReport(symbol, samples)
    for _ in range(samples):
        k = rng.randint(0, k_max)
        radius = Fraction(1, 2 ** modulus(k))
        if not inclusive:
            radius *= Fraction(1023, 1024)
        ps = [P.point(rng.randrange(pool)) for _ in range(arity)]
        if arity > 1 and rng.random() < 0.5:
            shared = _unit_perturbation(P, rng, radius, pool)
            deltas = [shared] * arity
        else:
            deltas = [_unit_perturbation(P, rng, radius, pool) for _ in range(arity)]
        qs = [p + d for p, d in zip(ps, deltas)]
        prec = k + 16
        if kind == "operation":
            out = distance(P.apply_vectors(symbol, ps), P.apply_vectors(symbol, qs), prec)
        else:
            out = abs(P.functional_value(symbol, ps, prec) - P.functional_value(symbol, qs, prec))
        threshold = Fraction(1, 2 ** k)
        if out.lo >= threshold:
            report.violations.append({"k": k, "inputs": [str(p) for p in ps],
                                      "perturbed": [str(q) for q in qs], "output": out})
        elif out.hi >= threshold:
            report.inconclusive += 1
    return report
