"""Vector trees, disintegration checks, almost norm-maximizing chains and chain limits.

Node addresses are tuples of naturals; a tree is a prefix-closed finite set of
addresses with an injective labelling by vectors.  Every verdict is relative to
the depth budget the tree was built with.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import PrecisionExhausted, UnsupportedSpace, ValidationMissing
from .exact import DyadicInterval, root_p
from .lebesgue import (
    Kind,
    LpSpace,
    LpVector,
    SeqVector,
    StepFunction,
    disjointly_supported,
    norm,
    norm_pow,
    standard_generator,
)

__all__ = [
    "VectorTree",
    "DisintegrationReport",
    "ChildChoice",
    "ChainPartition",
    "ChainLimit",
    "standard_disintegration",
    "fan_width",
    "validate_disintegration",
    "partition_chains",
    "chain_limit",
    "all_chain_limits",
    "norm_below",
    "norm_at_most",
]

CERTIFIED = "certified"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"

ZERO_CERTIFIED = "zero-certified"
ATOM_CERTIFIED = "atom-certified"
UNKNOWN = "unknown-at-depth"


class VectorTree:
    """Finite prefix-closed tree of addresses with an injective vector labelling.

    ``terms`` optionally records, per node, the label as a term of some
    presentation (used when a tree is built from a presentation's generators).
    """

    def __init__(self, space: LpSpace, labels: dict, depth: int, terms: Optional[dict] = None,
                 meta: Optional[dict] = None):
        if depth < 0:
            raise ValueError("depth budget must be >= 0")
        if () not in labels:
            raise ValueError("tree must contain the root ()")
        for node in labels:
            if node and node[:-1] not in labels:
                raise ValueError(f"node {node} has no parent; node set not prefix-closed")
            if len(node) > depth:
                raise ValueError(f"node {node} exceeds depth budget {depth}")
        seen = {}
        for node, v in labels.items():
            if v.space != space:
                raise ValueError(f"label of {node} lives in {v.space}, not {space}")
            if v in seen:
                raise ValueError(f"labels of {seen[v]} and {node} coincide; labelling not injective")
            seen[v] = node
        self.space = space
        self.depth = depth
        self.labels = dict(labels)
        self.terms = dict(terms) if terms else {}
        self.meta = dict(meta) if meta else {}
        self._children: dict = {node: [] for node in labels}
        for node in sorted(labels, key=_bfs_key):
            if node:
                self._children[node[:-1]].append(node)

    def __len__(self):
        return len(self.labels)

    def __contains__(self, node):
        return node in self.labels

    def label(self, node) -> LpVector:
        return self.labels[node]

    def children(self, node) -> list:
        return self._children[node]

    def is_terminal(self, node) -> bool:
        return not self._children[node]

    def nodes(self) -> list:
        """All addresses in breadth-first order (depth, then lexicographic)."""
        return sorted(self.labels, key=_bfs_key)

    def with_label(self, node, v: LpVector) -> VectorTree:
        labels = dict(self.labels)
        labels[node] = v
        return VectorTree(self.space, labels, self.depth, meta=self.meta)


def _bfs_key(node):
    return (len(node), node)


def fan_width(space: LpSpace, depth: int) -> int:
    """Children of the atomic fan: all n atoms, or 2**depth of them for infinite l^p."""
    if space.kind.finite_atoms:
        return space.n
    return 1 << depth


def _bisection(prefix: tuple, a: Fraction, b: Fraction, remaining: int, make, out: dict):
    out[prefix] = make(a, b)
    if remaining == 0:
        return
    mid = (a + b) / 2
    _bisection(prefix + (0,), a, mid, remaining - 1, make, out)
    _bisection(prefix + (1,), mid, b, remaining - 1, make, out)


def standard_disintegration(space: LpSpace, depth: int) -> VectorTree:
    """The shipped disintegration of a standard space, truncated at ``depth``.

    * ``Lp01``: dyadic bisection, node ``s`` labelled by the indicator of ``I_s``.
    * ``lp_n`` / ``lp``: a fan; the root is the sum of the fan's atoms, children are the atoms.
    * sums: root ``(sum of atoms, 1)``; children ``0..W-1`` are the atoms, children
      ``W`` and ``W+1`` are the two halves of ``[0,1]``, each bisected further.
    """
    if depth < 0:
        raise ValueError("depth must be >= 0")
    kind = space.kind
    labels: dict = {}
    if kind is Kind.LP01:
        _bisection((), Fraction(0), Fraction(1), depth, space.indicator, labels)
        return VectorTree(space, labels, depth, meta={"shape": "bisection"})
    if kind not in (Kind.LPN, Kind.LP, Kind.LPN_SUM, Kind.LP_SUM):
        raise UnsupportedSpace(f"no standard disintegration for {space}")
    width = fan_width(space, depth)
    root = space.zero()
    for i in range(width):
        root = root + space.atom(i)
    if kind.has_continuum:
        root = root + space.indicator(0, 1)
    labels[()] = root
    if depth >= 1:
        for i in range(width):
            labels[(i,)] = space.atom(i)
        if kind.has_continuum:
            half = Fraction(1, 2)
            _bisection((width,), Fraction(0), half, depth - 1, space.indicator, labels)
            _bisection((width + 1,), half, Fraction(1), depth - 1, space.indicator, labels)
    return VectorTree(space, labels, depth, meta={"shape": "fan", "width": width})


# ---------------------------------------------------------------------------
# validation


@dataclass
class DisintegrationReport:
    nonvanishing: bool
    separating: bool
    summative: bool
    linearly_dense: str
    depth: int
    tolerance_exp: int
    probes: int
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.nonvanishing and self.separating and self.summative and self.linearly_dense == CERTIFIED

    @property
    def structural(self) -> bool:
        return self.separating and self.summative

    def render(self) -> str:
        lines = [
            f"depth {self.depth}",
            f"nonvanishing {str(self.nonvanishing).lower()}",
            f"separating {str(self.separating).lower()}",
            f"summative {str(self.summative).lower()}",
            f"linearly-dense {self.linearly_dense} tolerance=2^-{self.tolerance_exp} probes={self.probes}",
        ]
        lines += [f"note {n}" for n in self.notes]
        return "\n".join(lines)


def _inner(u: LpVector, v: LpVector) -> Fraction:
    """Exact L^2-style pairing of two rational vectors (used only to pick greedy coefficients)."""
    total = Fraction(0)
    vd = v.atomic.as_dict()
    for i, q in u.atomic.coeffs:
        total += q * vd.get(i, 0)
    prod = u.continuous.combine(v.continuous, lambda a, b: a * b)
    for a, b, val in prod.pieces():
        total += val * (b - a)
    return total


def _label_cover(labels):
    """Atoms and merged continuous intervals carrying some label."""
    atoms = set()
    spans = []
    for v in labels:
        atoms |= v.atomic.support()
        spans.extend(v.continuous.support())
    merged = []
    for a, b in sorted(spans):
        if merged and a <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return atoms, [tuple(m) for m in merged]


def _outside_support(r: LpVector, cover) -> LpVector:
    """Part of r living where no label is supported."""
    atoms, spans = cover
    atomic = {i: q for i, q in r.atomic.coeffs if i not in atoms}
    inside = StepFunction()
    for a, b in spans:
        inside = inside + StepFunction.indicator(a, b)
    cont = r.continuous.combine(inside, lambda x, c: x if c == 0 else Fraction(0))
    return LpVector(r.space, SeqVector.from_mapping(atomic), cont)


def _span(v: LpVector):
    sup = v.continuous.support()
    return (v.atomic.support(), (sup[0][0], sup[-1][1]) if sup else None)


def _touches(r_span, u_span) -> bool:
    (ra, rc), (ua, uc) = r_span, u_span
    if ra & ua:
        return True
    return rc is not None and uc is not None and rc[0] < uc[1] and uc[0] < rc[1]


def _greedy_residual(probe: LpVector, ordered: Sequence[LpVector], spans: Sequence) -> LpVector:
    r = probe
    r_span = _span(r)
    for u, u_span in zip(ordered, spans):
        if r.is_zero():
            break
        if not _touches(r_span, u_span):
            continue
        c = _inner(r, u)
        if c != 0:
            r = r - u.scale(c / _inner(u, u))
            r_span = _span(r)
    return r


def validate_disintegration(tree: VectorTree, k: int = 20, tolerance_exp: int = 10,
                            probes: Optional[Sequence[LpVector]] = None) -> DisintegrationReport:
    """Check the four disintegration properties of a finite tree.

    Nonvanishing, separating and summative are exact.  Linear density is
    certified per probe by a greedy projection onto the labels (deepest first)
    followed by a norm enclosure of the residual; it is reported violated only
    when some probe has mass outside the union of all label supports.
    """
    nodes = tree.nodes()
    notes = []
    nonvanishing = all(not tree.label(n).is_zero() for n in nodes)

    summative = True
    for node in nodes:
        kids = tree.children(node)
        if not kids:
            continue
        total = tree.space.zero()
        for c in kids:
            total = total + tree.label(c)
        if total != tree.label(node):
            summative = False
            notes.append(f"not summative at {_addr(node)}")
            break

    siblings_disjoint = True
    for node in nodes:
        kids = tree.children(node)
        for i, a in enumerate(kids):
            for b in kids[i + 1:]:
                if not disjointly_supported(tree.label(a), tree.label(b)):
                    siblings_disjoint = False
                    notes.append(f"siblings {_addr(a)} and {_addr(b)} overlap")
                    break
            if not siblings_disjoint:
                break
        if not siblings_disjoint:
            break
    if summative or not siblings_disjoint:
        # With summative labels, disjoint siblings make every label a component
        # of its parent, so incomparable nodes are disjoint too.
        separating = siblings_disjoint
    else:
        separating = all(
            disjointly_supported(tree.label(a), tree.label(b))
            for i, a in enumerate(nodes)
            for b in nodes[i + 1:]
            if a[: len(b)] != b and b[: len(a)] != a
        )

    if probes is None:
        probes = default_probes(tree.space)
    tol = Fraction(1, 2 ** tolerance_exp)
    ordered = [tree.label(n) for n in sorted(nodes, key=lambda n: (-len(n), n))]
    spans = [_span(u) for u in ordered]
    cover = _label_cover(ordered)
    dense = CERTIFIED
    for idx, probe in enumerate(probes):
        outside = _outside_support(probe, cover)
        if not outside.is_zero() and norm(outside, tolerance_exp + 2).lo > tol:
            dense = VIOLATED
            notes.append(f"probe {idx} has mass outside every label")
            break
        residual = _greedy_residual(probe, ordered, spans)
        if residual.is_zero() or norm(residual, max(k, tolerance_exp + 2)).hi <= tol:
            continue
        dense = INCONCLUSIVE
        notes.append(f"probe {idx} residual not certified below 2^-{tolerance_exp}")
    return DisintegrationReport(nonvanishing, separating, summative, dense, tree.depth,
                                tolerance_exp, len(probes), notes)


def default_probes(space: LpSpace, count: int = 16) -> list:
    gc = space.generator_count()
    if gc is not None:
        count = min(count, gc)
    return [standard_generator(space, i) for i in range(count)]


def _addr(node) -> str:
    return "<" + ",".join(map(str, node)) + ">"


# ---------------------------------------------------------------------------
# chains


@dataclass(frozen=True)
class ChildChoice:
    """Replayable record of one chain-extension decision."""

    parent: tuple
    chosen: tuple
    enclosures: tuple  # (child, DyadicInterval of ||label||_p^p) in child order
    parent_power: Optional[DyadicInterval] = None

    def certified(self) -> bool:
        """Every sibling's p-th power is at most the chosen one's plus 2**-|chosen|."""
        slack = Fraction(1, 2 ** len(self.chosen))
        chosen = dict(self.enclosures)[self.chosen]
        return all(enc.hi <= chosen.lo + slack for _, enc in self.enclosures)

    def strict_certified(self) -> bool:
        if self.parent_power is None:
            return False
        chosen = dict(self.enclosures)[self.chosen]
        bound = chosen.lo + self.parent_power.lo / 2
        return all(enc.hi < bound for c, enc in self.enclosures if c != self.chosen)


@dataclass
class ChainPartition:
    chains: list  # list of node lists, ordered by prefix
    assignment: dict  # node -> chain id
    choices: list  # ChildChoice records
    strict: bool = False

    @property
    def count(self) -> int:
        return len(self.chains)

    def chain_of(self, node) -> int:
        return self.assignment[node]


def partition_chains(tree: VectorTree, report: Optional[DisintegrationReport],
                     strict: bool = False, max_extra_bits: int = 40) -> ChainPartition:
    """Greedy breadth-first partition into almost norm-maximizing chains.

    At a node whose children sit at depth ``d``, the child with the largest
    midpoint of its ``||.||_p^p`` enclosure at precision ``d + 2`` continues the
    parent's chain (lowest index on ties); the others start new chains.  In
    ``strict`` mode the choice must also certify that every other sibling is
    below the chosen one plus half the parent's p-th power; precision is raised
    until that holds.
    """
    if report is None or not report.structural:
        raise ValidationMissing("partition_chains needs a tree validated separating and summative")
    chains: list = [[()]]
    assignment = {(): 0}
    choices = []
    for node in tree.nodes():
        kids = tree.children(node)
        if not kids:
            continue
        d = len(node) + 1
        prec = d + 2
        while True:
            encs = [(c, norm_pow(tree.label(c), prec)) for c in kids]
            best = encs[0]
            for c, e in encs[1:]:
                if e.mid > best[1].mid:
                    best = (c, e)
            parent_power = norm_pow(tree.label(node), prec) if strict else None
            choice = ChildChoice(node, best[0], tuple(encs), parent_power)
            if not strict or choice.strict_certified():
                break
            prec += 4
            if prec > d + 2 + max_extra_bits:
                raise PrecisionExhausted(f"strict child condition not certified at {_addr(node)}")
        choices.append(choice)
        cid = assignment[node]
        for c in kids:
            if c == choice.chosen:
                assignment[c] = cid
                chains[cid].append(c)
            else:
                assignment[c] = len(chains)
                chains.append([c])
    return ChainPartition(chains, assignment, choices, strict)


@dataclass
class ChainLimit:
    chain_id: int
    nodes: list
    norm_enclosures: list  # ||label||_p^p per chain node
    upper_bounds: list  # running minimum of the enclosure upper ends
    verdict: str
    witness: Optional[LpVector]
    error: Fraction
    norm: Optional[DyadicInterval] = None
    p: Fraction = Fraction(1)

    def stage_upper(self, stage: int) -> Optional[Fraction]:
        """Best upper bound on ||g||_p^p using chain nodes of depth <= stage."""
        best = None
        for node, ub in zip(self.nodes, self.upper_bounds):
            if len(node) <= stage:
                best = ub
        return best

    def atom_visible(self, stage: int) -> bool:
        return self.verdict == ATOM_CERTIFIED and len(self.nodes[-1]) <= stage


def norm_below(power_upper: Fraction, p: Fraction, k: int) -> bool:
    """Certify ``power_upper**(1/p) < 2**-k``."""
    if power_upper <= 0:
        return True
    return root_p(DyadicInterval.point(power_upper), p, k + 8).hi < Fraction(1, 2 ** k)


def norm_at_most(power_upper: Fraction, p: Fraction, k: int) -> bool:
    """Certify ``power_upper**(1/p) <= 2**-k``."""
    if power_upper <= 0:
        return True
    return root_p(DyadicInterval.point(power_upper), p, k + 8).hi <= Fraction(1, 2 ** k)


def chain_limit(tree: VectorTree, part: ChainPartition, chain_id: int, k: int,
                stage: Optional[int] = None) -> ChainLimit:
    """Limit of the labels along one chain, as far as the tree (or ``stage``) reveals it.

    The limit is a component of every label on the chain, so the running minimum
    of ``||label||_p^p`` upper bounds bounds ``||g||_p^p``.  A chain ending in an
    exact atom is atom-certified with that atom as witness; a chain whose bound
    falls below ``2**-k`` in norm is zero-certified.
    """
    if not 0 <= chain_id < part.count:
        raise IndexError(f"chain {chain_id} out of range {part.count}")
    nodes = [n for n in part.chains[chain_id] if stage is None or len(n) <= stage]
    if not nodes:
        raise ValueError(f"chain {chain_id} has no node within stage {stage}")
    p = tree.space.p
    encs, uppers = [], []
    for n in nodes:
        e = norm_pow(tree.label(n), k + 2)
        encs.append(e)
        uppers.append(e.hi if not uppers else min(uppers[-1], e.hi))
    last = tree.label(nodes[-1])
    if last.is_atom():
        return ChainLimit(chain_id, nodes, encs, uppers, ATOM_CERTIFIED, last, Fraction(0),
                          norm(last, k + 2), p)
    if norm_below(uppers[-1], p, k):
        bound = root_p(DyadicInterval.point(uppers[-1]), p, k + 8).hi
        return ChainLimit(chain_id, nodes, encs, uppers, ZERO_CERTIFIED, tree.space.zero(), bound,
                          DyadicInterval(Fraction(0), bound, k), p)
    return ChainLimit(chain_id, nodes, encs, uppers, UNKNOWN, None, Fraction(0), None, p)


def all_chain_limits(tree: VectorTree, part: ChainPartition, k: int,
                     stage: Optional[int] = None) -> list:
    out = []
    for cid in range(part.count):
        nodes = [n for n in part.chains[cid] if stage is None or len(n) <= stage]
        if nodes:
            out.append(chain_limit(tree, part, cid, k, stage))
    return out
