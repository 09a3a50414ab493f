"""Finite-stage checking of the Pi^0_1 class of isometry tables, and a pruned table search.

A table pair ``(f, g)`` lists, for each rational point index ``m`` and
precision index ``n``, a rational point of the other presentation that should
approximate the image of ``x_m`` (resp. preimage of ``y_m``) within
``2**-n``.  :func:`check_conditions` evaluates the six defining conditions on
every instance whose quantified indices are at most ``depth``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence

from .errors import BudgetExhausted, GridTooSmall
from .exact import DyadicInterval
from .signature import Presentation

__all__ = [
    "IsometryTable",
    "TermMaps",
    "ConditionResult",
    "ConditionVerdict",
    "check_conditions",
    "SearchResult",
    "search_tables",
    "limit_map_from_table",
    "HOLDS",
    "VIOLATED",
    "INCONCLUSIVE",
]

HOLDS = "holds-certified"
VIOLATED = "violated-certified"
INCONCLUSIVE = "inconclusive"

CONDITIONS = (1, 2, 3, 4, 5, 6)


class _Undefined(Exception):
    pass


@dataclass
class IsometryTable:
    """Finite tables ``f, g: [0,rows) x [0,cols) -> N``; missing rows are undefined."""

    f: dict
    g: dict
    rows: int
    cols: int

    def __post_init__(self):
        for name, tab in (("f", self.f), ("g", self.g)):
            for m, row in tab.items():
                if not 0 <= m < self.rows:
                    raise ValueError(f"{name} row {m} outside grid of {self.rows} rows")
                if len(row) != self.cols:
                    raise ValueError(f"{name} row {m} has {len(row)} entries, grid needs {self.cols}")

    @classmethod
    def from_functions(cls, f: Callable[[int, int], int], g: Callable[[int, int], int],
                       rows: int, cols: int) -> IsometryTable:
        return cls({m: tuple(f(m, n) for n in range(cols)) for m in range(rows)},
                   {m: tuple(g(m, n) for n in range(cols)) for m in range(rows)}, rows, cols)

    @classmethod
    def identity(cls, rows: int, cols: int) -> IsometryTable:
        return cls.from_functions(lambda m, n: m, lambda m, n: m, rows, cols)

    @classmethod
    def column_constant(cls, fvals: Sequence[int], gvals: Sequence[int], cols: int,
                        rows: Optional[int] = None) -> IsometryTable:
        rows = rows if rows is not None else max(len(fvals), len(gvals))
        return cls({m: (v,) * cols for m, v in enumerate(fvals)},
                   {m: (v,) * cols for m, v in enumerate(gvals)}, rows, cols)

    def total(self) -> bool:
        return len(self.f) == self.rows and len(self.g) == self.rows

    def covers(self, depth: int) -> bool:
        """Rows ``0..depth`` of both tables exist and have at least ``depth + 1`` columns.

        Other rows are optional; instances that look them up are skipped.
        """
        rng = range(depth + 1)
        return self.cols > depth and all(m in self.f and m in self.g for m in rng)

    def fv(self, m: int, n: int) -> int:
        row = self.f.get(m)
        if row is None or not 0 <= n < self.cols:
            raise _Undefined
        return row[n]

    def gv(self, m: int, n: int) -> int:
        row = self.g.get(m)
        if row is None or not 0 <= n < self.cols:
            raise _Undefined
        return row[n]

    def with_rows(self, f_rows: dict, g_rows: dict) -> IsometryTable:
        return IsometryTable({**self.f, **f_rows}, {**self.g, **g_rows}, self.rows, self.cols)

    def entries(self) -> Iterable[tuple[str, int, int, int]]:
        for name, tab in (("f", self.f), ("g", self.g)):
            for m in sorted(tab):
                for n, v in enumerate(tab[m]):
                    yield name, m, n, v

    def key(self) -> tuple:
        return (tuple(sorted(self.f.items())), tuple(sorted(self.g.items())))


class TermMaps:
    """The index maps for operations and constants of both presentations.

    ``zeta(T, js)`` is the index of ``T(x_j1, ...)`` in the source, ``zeta_prime``
    the same in the target; constants map ``j`` to an index within ``2**-j``.
    Operations are ``+`` and ``*s`` for the given scalars; the functional is the norm.
    """

    def __init__(self, P0: Presentation, P1: Presentation,
                 scalars: Sequence = (-1, 2, Fraction(1, 2))):
        self.P0, self.P1 = P0, P1
        sig = P0.signature
        if sig.name != P1.signature.name:
            raise ValueError(f"signatures differ: {sig.name} vs {P1.signature.name}")
        self.signature = sig
        ops = list(sig.operations)
        if sig.scalar_family:
            ops += [(f"*{Fraction(s)}", 1) for s in scalars]
        self.operations = ops
        self.functionals = list(sig.functionals)
        self.constants = list(sig.constants)
        self._cache: dict = {}

    def modulus(self, symbol: str, m: int) -> int:
        return self.signature.modulus(symbol, m)

    def zeta(self, symbol: str, js: tuple) -> int:
        key = (0, symbol, js)
        if key not in self._cache:
            self._cache[key] = self.P0.apply(symbol, js)
        return self._cache[key]

    def zeta_prime(self, symbol: str, js: tuple) -> int:
        key = (1, symbol, js)
        if key not in self._cache:
            self._cache[key] = self.P1.apply(symbol, js)
        return self._cache[key]

    def zeta_c(self, c: str, j: int) -> int:
        return self.P0.constant_index(c, j)

    def zeta_c_prime(self, c: str, j: int) -> int:
        return self.P1.constant_index(c, j)


@dataclass
class ConditionResult:
    status: str = HOLDS
    instances: int = 0
    inconclusive: int = 0
    witness: Optional[dict] = None

    def record(self, enc: DyadicInterval, threshold: Fraction, witness: dict) -> bool:
        """Fold one instance in; returns True if it is a certified violation."""
        self.instances += 1
        if enc.lo > threshold:
            if self.status != VIOLATED:
                self.status = VIOLATED
                self.witness = {**witness, "value": enc, "threshold": threshold}
            return True
        if enc.hi > threshold:
            self.inconclusive += 1
            if self.status == HOLDS:
                self.status = INCONCLUSIVE
        return False


@dataclass
class ConditionVerdict:
    results: dict = field(default_factory=lambda: {c: ConditionResult() for c in CONDITIONS})
    depth: int = 0
    precision: int = 0

    def status(self, condition: int) -> str:
        return self.results[condition].status

    def violated(self) -> list:
        return [c for c in CONDITIONS if self.results[c].status == VIOLATED]

    def all_hold(self) -> bool:
        return all(r.status == HOLDS for r in self.results.values())

    @property
    def overall(self) -> str:
        if self.violated():
            return VIOLATED
        return HOLDS if self.all_hold() else INCONCLUSIVE

    def render(self) -> str:
        lines = [f"depth {self.depth}", f"precision {self.precision}"]
        for c in CONDITIONS:
            r = self.results[c]
            line = f"condition {c} {r.status} instances={r.instances} inconclusive={r.inconclusive}"
            if r.witness:
                w = " ".join(f"{k}={v}" for k, v in r.witness.items())
                line += f" witness {w}"
            lines.append(line)
        return "\n".join(lines)


class _Evaluator:
    """Cached metric and functional enclosures for a presentation pair at a fixed precision."""

    def __init__(self, P0: Presentation, P1: Presentation, k: int):
        self.P0, self.P1, self.k = P0, P1, k
        self._d0: dict = {}
        self._d1: dict = {}
        self._n0: dict = {}
        self._n1: dict = {}

    def d0(self, i, j):
        key = (i, j) if i <= j else (j, i)
        if key not in self._d0:
            self._d0[key] = self.P0.eval_metric(key[0], key[1], self.k)
        return self._d0[key]

    def d1(self, i, j):
        key = (i, j) if i <= j else (j, i)
        if key not in self._d1:
            self._d1[key] = self.P1.eval_metric(key[0], key[1], self.k)
        return self._d1[key]

    def F0(self, symbol, j):
        key = (symbol, j)
        if key not in self._n0:
            self._n0[key] = self.P0.eval_functional(symbol, (j,), self.k)
        return self._n0[key]

    def F1(self, symbol, j):
        key = (symbol, j)
        if key not in self._n1:
            self._n1[key] = self.P1.eval_functional(symbol, (j,), self.k)
        return self._n1[key]


def _pow2(e: int) -> Fraction:
    return Fraction(1, 2 ** e) if e >= 0 else Fraction(2 ** -e)


class _Focused:
    """Table view that records which rows an instance reads."""

    def __init__(self, table: IsometryTable):
        self.table = table
        self.touched: set = set()

    def fv(self, m, n):
        v = self.table.fv(m, n)
        self.touched.add(("f", m))
        return v

    def gv(self, m, n):
        v = self.table.gv(m, n)
        self.touched.add(("g", m))
        return v


def _max_valid_m(mod: Callable[[int], int], bound: int, depth: int) -> Optional[int]:
    """Largest m <= depth with mod(m) <= bound (moduli are nondecreasing)."""
    best = None
    for m in range(depth + 1):
        if mod(m) <= bound:
            best = m
        else:
            break
    return best


def _instances(table: IsometryTable, tm: TermMaps, depth: int, ev: _Evaluator, only=None):
    """Yield (condition, enclosure, threshold, witness, view) for every evaluable instance."""
    R = range(depth + 1)
    want = set(only) if only else set(CONDITIONS)

    def run(cond, fn):
        view = _Focused(table)
        try:
            enc, thr, wit = fn(view)
        except _Undefined:
            return None
        return cond, enc, thr, wit, view

    if 1 in want:
        for m in R:
            for n in R:
                if n + 1 >= table.cols:
                    continue
                for tab, d in (("f", ev.d1), ("g", ev.d0)):
                    def c1(v, m=m, n=n, tab=tab, d=d):
                        get = v.fv if tab == "f" else v.gv
                        return d(get(m, n), get(m, n + 1)), _pow2(n + 1), {"table": tab, "m": m, "n": n}
                    out = run(1, c1)
                    if out:
                        yield out
    if 2 in want:
        for m in R:
            for m2 in R:
                for n in R:
                    for n2 in R:
                        def c2(v, m=m, m2=m2, n=n, n2=n2):
                            enc = abs(ev.d0(m, m2) - ev.d1(v.fv(m, n), v.fv(m2, n2)))
                            return enc, _pow2(n) + _pow2(n2), {"m": m, "m'": m2, "n": n, "n'": n2}
                        out = run(2, c2)
                        if out:
                            yield out
    if 3 in want:
        for m in R:
            for n in R:
                for n2 in R:
                    def c3a(v, m=m, n=n, n2=n2):
                        return (ev.d0(m, v.gv(v.fv(m, n), n2)), _pow2(n) + _pow2(n2),
                                {"side": "g(f)", "m": m, "n": n, "n'": n2})

                    def c3b(v, m=m, n=n, n2=n2):
                        return (ev.d1(m, v.fv(v.gv(m, n), n2)), _pow2(n) + _pow2(n2),
                                {"side": "f(g)", "m": m, "n": n, "n'": n2})
                    for fn in (c3a, c3b):
                        out = run(3, fn)
                        if out:
                            yield out
    if 4 in want:
        for sym, arity in tm.operations:
            mod = lambda m, sym=sym: tm.modulus(sym, m)
            for js in _tuples(R, arity):
                z = tm.zeta(sym, js)
                for kk in R:
                    for ks in _tuples(R, arity):
                        m = _max_valid_m(mod, min(ks) + 1, depth)
                        if m is None:
                            continue

                        def c4(v, sym=sym, js=js, z=z, kk=kk, ks=ks, m=m):
                            w = tm.zeta_prime(sym, tuple(v.fv(j, kj) for j, kj in zip(js, ks)))
                            return (ev.d1(v.fv(z, kk), w), _pow2(kk + 1) + _pow2(m),
                                    {"op": sym, "j": js, "k": kk, "ks": ks, "m": m})
                        out = run(4, c4)
                        if out:
                            yield out
    if 5 in want:
        for sym, arity in tm.functionals:
            mod = lambda m, sym=sym: tm.modulus(sym, m)
            if arity != 1:
                raise NotImplementedError("only unary functionals are supported")
            for j in R:
                for k1 in R:
                    m = _max_valid_m(mod, k1 + 1, depth)
                    if m is None:
                        continue

                    def c5(v, sym=sym, j=j, k1=k1, m=m):
                        enc = abs(ev.F0(sym, j) - ev.F1(sym, v.fv(j, k1)))
                        return enc, _pow2(m), {"functional": sym, "j": j, "k1": k1, "m": m}
                    out = run(5, c5)
                    if out:
                        yield out
    if 6 in want:
        for c in tm.constants:
            for j in R:
                for kk in R:
                    def c6(v, c=c, j=j, kk=kk):
                        enc = ev.d1(tm.zeta_c_prime(c, j), v.fv(tm.zeta_c(c, j), kk))
                        return enc, _pow2(j - 1) + _pow2(kk + 1), {"constant": c, "j": j, "k": kk}
                    out = run(6, c6)
                    if out:
                        yield out


def _tuples(R, arity):
    if arity == 0:
        yield ()
        return
    for head in R:
        for rest in _tuples(R, arity - 1):
            yield (head,) + rest


def check_conditions(table: IsometryTable, P0: Presentation, P1: Presentation, tm: TermMaps,
                     depth: int, k: int, _evaluator: Optional[_Evaluator] = None,
                     focus: Optional[tuple] = None, stop_at_first: bool = False) -> ConditionVerdict:
    """Evaluate conditions (1)-(6) on every instance with quantified indices <= depth.

    Lookups that leave the table's grid (e.g. ``f`` at a composed index beyond
    the rows) make that instance unevaluable; it is skipped.  With ``focus``
    set to ``("f", r)`` or ``("g", r)`` only instances reading that row count.
    """
    if focus is None and not table.covers(depth):
        raise GridTooSmall(f"grid {table.rows}x{table.cols} does not cover depth {depth}")
    ev = _evaluator or _Evaluator(P0, P1, k)
    verdict = ConditionVerdict(depth=depth, precision=k)
    for cond, enc, thr, wit, view in _instances(table, tm, depth, ev):
        if focus is not None and focus not in view.touched:
            continue
        if verdict.results[cond].record(enc, thr, wit) and stop_at_first:
            break
    return verdict


def limit_map_from_table(table: IsometryTable, m: int, k: int) -> tuple[int, Fraction]:
    """The approximation ``f(m, k)`` of the image of ``x_m``, within ``2**-k`` by the Cauchy clause."""
    if not 0 <= k < table.cols or m not in table.f:
        raise GridTooSmall(f"f({m},{k}) outside the {table.rows}x{table.cols} grid")
    return table.f[m][k], _pow2(k)


# ---------------------------------------------------------------------------
# search


@dataclass
class SearchResult:
    survivors: list
    prune_counts: dict
    explored: int
    exhausted: bool

    def render(self) -> str:
        lines = [f"explored {self.explored}", f"budget-exhausted {str(self.exhausted).lower()}",
                 f"survivors {len(self.survivors)}"]
        for c in CONDITIONS:
            lines.append(f"pruned condition {c} {self.prune_counts.get(c, 0)}")
        for t in self.survivors:
            f = ",".join(str(t.f[m][0]) for m in sorted(t.f))
            g = ",".join(str(t.g[m][0]) for m in sorted(t.g))
            lines.append(f"survivor f=[{f}] g=[{g}]")
        return "\n".join(lines)


def _norm_of(P: Presentation, i: int, ev_d) -> Optional[DyadicInterval]:
    if P.signature.kind_or_none("norm") == "functional":
        return ev_d("norm", i)
    return None


def search_tables(P0: Presentation, P1: Presentation, tm: TermMaps, depth: int, k: int, budget: int,
                  pool: int = 64, f_candidates: Optional[Sequence[int]] = None,
                  g_candidates: Optional[Sequence[int]] = None, strict_budget: bool = False) -> SearchResult:
    """Depth-first search over column-constant table prefixes for rows ``0..depth``.

    Row ``r`` of ``f`` is chosen, then row ``r`` of ``g``, each from its
    candidate list in increasing order.  After every choice the instances that
    read the new row are checked; a certified violation prunes the branch and
    is counted under the lowest violated condition.  Candidates are first
    filtered by the norm ball ``| ||x|| - ||y|| | <= 2**-depth`` when the
    signature has a norm.
    """
    if budget < 1:
        raise ValueError("budget must be >= 1")
    ev = _Evaluator(P0, P1, k)
    cols = depth + 1
    rows = depth + 1
    f_pool = sorted(set(f_candidates)) if f_candidates is not None else _pool(P1, pool)
    g_pool = sorted(set(g_candidates)) if g_candidates is not None else _pool(P0, pool)
    slack = _pow2(depth)

    def ball(src_norm, cand_norm):
        if src_norm is None or cand_norm is None:
            return True
        return cand_norm.lo <= src_norm.hi + slack and src_norm.lo <= cand_norm.hi + slack

    f_opts = {r: [v for v in f_pool if ball(_norm_of(P0, r, ev.F0), _norm_of(P1, v, ev.F1))] for r in range(rows)}
    g_opts = {r: [v for v in g_pool if ball(_norm_of(P1, r, ev.F1), _norm_of(P0, v, ev.F0))] for r in range(rows)}

    prune_counts = {c: 0 for c in CONDITIONS}
    survivors = []
    explored = 0
    exhausted = False
    steps = [s for r in range(rows) for s in (("f", r), ("g", r))]

    def extend(table: IsometryTable, step: int):
        nonlocal explored, exhausted
        if step == len(steps):
            survivors.append(table)
            return
        which, r = steps[step]
        for v in (f_opts if which == "f" else g_opts)[r]:
            if explored >= budget:
                exhausted = True
                return
            explored += 1
            row = {r: (v,) * cols}
            nxt = table.with_rows(row, {}) if which == "f" else table.with_rows({}, row)
            verdict = check_conditions(nxt, P0, P1, tm, depth, k, _evaluator=ev, focus=(which, r),
                                       stop_at_first=True)
            bad = verdict.violated()
            if bad:
                prune_counts[bad[0]] += 1
                continue
            extend(nxt, step + 1)
            if exhausted:
                return

    extend(IsometryTable({}, {}, rows, cols), 0)
    survivors.sort(key=lambda t: t.key())
    result = SearchResult(survivors, prune_counts, explored, exhausted)
    if exhausted and strict_budget:
        raise BudgetExhausted(f"budget {budget} exhausted", partial=result)
    return result


def _pool(P: Presentation, size: int) -> list:
    bound = getattr(P, "size", None)
    return list(range(min(size, bound) if bound is not None else size))
