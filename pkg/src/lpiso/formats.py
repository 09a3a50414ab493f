"""Text formats: presentations, isometry tables, graphs, tree dumps and report headers.

All formats are line based; blank lines and ``#`` comments are ignored.
Malformed input raises :class:`FormatError`.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional

from .errors import FormatError
from .exact import format_rational
from .graphs import Graph
from .lebesgue import Kind, LpSpace, format_vector
from .pi01 import IsometryTable
from .signature import BanachPresentation, FiniteMetricPresentation, Presentation, StandardPresentation
from .synthesis import HiddenIsometry, ScrambledPresentation

__all__ = [
    "PRESENTATION_HEADER",
    "REPORT_VERSION",
    "report_header",
    "read_presentation",
    "write_presentation",
    "read_table",
    "write_table",
    "read_graph",
    "write_graph",
    "tree_dump",
]

PRESENTATION_HEADER = "lpiso-presentation 1"
REPORT_VERSION = 1


def report_header(command: str) -> str:
    return f"lpiso-report {REPORT_VERSION} {command}"


def _lines(text: str) -> list[tuple[int, list[str]]]:
    out = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            out.append((no, line.split()))
    return out


def _ints(tokens, no) -> list[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise FormatError(f"line {no}: expected integers, got {' '.join(tokens)}") from exc


def _rational(token: str, no: int) -> Fraction:
    try:
        return Fraction(token)
    except (ValueError, ZeroDivisionError) as exc:
        raise FormatError(f"line {no}: bad rational {token!r}") from exc


# ---------------------------------------------------------------------------
# presentations


def read_presentation(text: str) -> Presentation:
    lines = _lines(text)
    if not lines or " ".join(lines[0][1]) != PRESENTATION_HEADER:
        raise FormatError(f"missing header {PRESENTATION_HEADER!r}")
    fields: dict = {}
    distances = []
    for no, toks in lines[1:]:
        key, rest = toks[0], toks[1:]
        if key == "d":
            if len(rest) != 3:
                raise FormatError(f"line {no}: expected 'd i j q'")
            i, j = _ints(rest[:2], no)
            distances.append((i, j, _rational(rest[2], no), no))
        elif key in fields:
            raise FormatError(f"line {no}: duplicate field {key!r}")
        else:
            fields[key] = (rest, no)

    def get(name, default=None):
        if name in fields:
            return fields[name]
        if default is not None:
            return default
        raise FormatError(f"missing field {name!r}")

    sig, _ = get("signature")
    if sig == ["metric"]:
        (count,), no = get("points")
        n = _ints([count], no)[0]
        table = [[Fraction(0)] * n for _ in range(n)]
        for i, j, q, no in distances:
            if not (0 <= i < n and 0 <= j < n):
                raise FormatError(f"line {no}: point index outside 0..{n - 1}")
            table[i][j] = table[j][i] = q
        try:
            return FiniteMetricPresentation(table)
        except ValueError as exc:
            raise FormatError(str(exc)) from exc
    if sig != ["banach"]:
        raise FormatError(f"unknown signature {' '.join(sig)!r}")
    (kind,), no = get("kind")
    (p,), pno = get("p")
    n_field = fields.get("n")
    try:
        space = LpSpace(Kind(kind), _rational(p, pno), _ints(n_field[0], n_field[1])[0] if n_field else None)
    except ValueError as exc:
        raise FormatError(f"line {no}: {exc}") from exc
    (gens,), gno = get("generators")
    if gens == "standard":
        return StandardPresentation(space)
    if gens != "scrambled":
        raise FormatError(f"line {gno}: generators must be 'standard' or 'scrambled'")

    def ints_field(name, default):
        toks, no = fields.get(name, (default, 0))
        return tuple(_ints(toks, no))

    perm, signs = ints_field("perm", []), ints_field("signs", [])
    (level,) = ints_field("level", ["0"])
    pieces, psigns = ints_field("pieces", ["0"]), ints_field("piece-signs", ["1"])
    try:
        return ScrambledPresentation(space, HiddenIsometry(perm, signs, level, pieces, psigns))
    except ValueError as exc:
        raise FormatError(f"bad scramble: {exc}") from exc


def write_presentation(P: Presentation) -> str:
    lines = [PRESENTATION_HEADER]
    if isinstance(P, FiniteMetricPresentation):
        lines += ["signature metric", f"points {P.size}"]
        for i in range(P.size):
            for j in range(i + 1, P.size):
                lines.append(f"d {i} {j} {format_rational(P.table[i][j])}")
        return "\n".join(lines) + "\n"
    if not isinstance(P, BanachPresentation):
        raise TypeError(f"cannot serialize {type(P).__name__}")
    sp = P.space
    lines += ["signature banach", f"kind {sp.kind.value}", f"p {format_rational(sp.p)}"]
    if sp.n is not None:
        lines.append(f"n {sp.n}")
    if isinstance(P, ScrambledPresentation):
        h = P.hidden
        lines += [
            "generators scrambled",
            "perm " + " ".join(map(str, h.perm)),
            "signs " + " ".join(map(str, h.atom_signs)),
            f"level {h.level}",
            "pieces " + " ".join(map(str, h.pieces)),
            "piece-signs " + " ".join(map(str, h.piece_signs)),
        ]
    elif isinstance(P, StandardPresentation):
        lines.append("generators standard")
    else:
        raise TypeError("only standard and scrambled presentations have a file form")
    return "\n".join(line.rstrip() for line in lines) + "\n"


# ---------------------------------------------------------------------------
# tables


def read_table(text: str) -> IsometryTable:
    entries = {"f": {}, "g": {}}
    for no, toks in _lines(text):
        if toks[0] not in ("f", "g") or len(toks) != 4:
            raise FormatError(f"line {no}: expected 'f m n v' or 'g m n v'")
        m, n, v = _ints(toks[1:], no)
        if min(m, n, v) < 0:
            raise FormatError(f"line {no}: negative index")
        key = (m, n)
        if key in entries[toks[0]]:
            raise FormatError(f"line {no}: duplicate entry {toks[0]}({m},{n})")
        entries[toks[0]][key] = v
    keys = list(entries["f"]) + list(entries["g"])
    if not keys:
        raise FormatError("empty table")
    rows = max(m for m, _ in keys) + 1
    cols = max(n for _, n in keys) + 1
    tabs = {}
    for name, ent in entries.items():
        present = sorted({m for m, _ in ent})
        tab = {}
        for m in present:
            row = []
            for n in range(cols):
                if (m, n) not in ent:
                    raise FormatError(f"{name}({m},{n}) missing; rows must cover 0..{cols - 1}")
                row.append(ent[(m, n)])
            tab[m] = tuple(row)
        tabs[name] = tab
    return IsometryTable(tabs["f"], tabs["g"], rows, cols)


def write_table(t: IsometryTable) -> str:
    return "".join(f"{name} {m} {n} {v}\n" for name, m, n, v in t.entries())


# ---------------------------------------------------------------------------
# graphs


def read_graph(text: str) -> Graph:
    lines = _lines(text)
    if not lines or len(lines[0][1]) != 1:
        raise FormatError("first line must be the vertex count")
    n = _ints(lines[0][1], lines[0][0])[0]
    pairs = []
    for no, toks in lines[1:]:
        if len(toks) != 2:
            raise FormatError(f"line {no}: expected 'u v'")
        u, v = _ints(toks, no)
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError(f"line {no}: vertex outside 0..{n - 1}")
        pairs.append((u, v))
    return Graph.from_pairs(n, pairs)


def write_graph(G: Graph) -> str:
    return f"{G.vertex_count}\n" + "".join(f"{u} {v}\n" for u, v in G.sorted_edges())


# ---------------------------------------------------------------------------
# trees


def _address(node) -> str:
    return "<" + ",".join(map(str, node)) + ">"


def tree_dump(tree, assignment: Optional[dict] = None) -> Iterable[str]:
    for node in tree.nodes():
        cid = assignment.get(node, "-") if assignment else "-"
        yield f"{_address(node)} ; {format_vector(tree.label(node))} ; {cid}"
