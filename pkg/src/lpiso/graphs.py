"""Loop-free graphs as {0,1,2}-valued metric spaces, and transfer of maps between the two views."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import LoopDetected, NotIsomorphism
from .signature import FiniteMetricPresentation

__all__ = [
    "Graph",
    "encode",
    "TransferResult",
    "isometry_to_isomorphism",
    "isomorphism_to_isometry",
    "all_isometries",
    "all_isomorphisms",
]


@dataclass(frozen=True)
class Graph:
    vertex_count: int
    edges: frozenset

    def __post_init__(self):
        norm = set()
        for e in self.edges:
            u, v = tuple(e) if len(e) == 2 else (next(iter(e)),) * 2
            if u == v:
                raise LoopDetected(f"loop at vertex {u}")
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise ValueError(f"edge ({u},{v}) outside 0..{self.vertex_count - 1}")
            norm.add(frozenset((u, v)))
        object.__setattr__(self, "edges", frozenset(norm))

    @classmethod
    def from_pairs(cls, n: int, pairs) -> Graph:
        pairs = list(pairs)
        for u, v in pairs:
            if u == v:
                raise LoopDetected(f"loop at vertex {u}")
        return cls(n, frozenset(frozenset(p) for p in pairs))

    def adjacent(self, u: int, v: int) -> bool:
        return frozenset((u, v)) in self.edges

    def adjacency(self) -> np.ndarray:
        a = np.zeros((self.vertex_count, self.vertex_count), dtype=np.int8)
        for e in self.edges:
            u, v = tuple(e)
            a[u, v] = a[v, u] = 1
        return a

    def sorted_edges(self) -> list:
        return sorted(tuple(sorted(e)) for e in self.edges)


def encode(G: Graph) -> FiniteMetricPresentation:
    """d(v,v) = 0, d(u,v) = 1 on edges, 2 otherwise."""
    n = G.vertex_count
    table = [[Fraction(0) if u == v else Fraction(1 if G.adjacent(u, v) else 2) for v in range(n)]
             for u in range(n)]
    return FiniteMetricPresentation(table, name="graph")


@dataclass
class TransferResult:
    ok: bool
    mapping: tuple
    violation: Optional[tuple] = None  # (u, v, d0, d1)

    def render(self) -> str:
        head = "status " + ("certified" if self.ok else "violated")
        lines = [head, "map " + " ".join(map(str, self.mapping))]
        if self.violation:
            u, v, d0, d1 = self.violation
            lines.append(f"violation pair {u} {v} distance {d0} -> {d1}")
        return "\n".join(lines)


def _check_bijection(F: Sequence[int], n0: int, n1: int):
    if len(F) != n0:
        raise ValueError(f"map has {len(F)} entries for {n0} vertices")
    if n0 != n1 or sorted(F) != list(range(n1)):
        return False
    return True


def _first_distance_violation(F, M0: FiniteMetricPresentation, M1: FiniteMetricPresentation):
    for u in range(M0.size):
        for v in range(u + 1, M0.size):
            d0, d1 = M0.table[u][v], M1.table[F[u]][F[v]]
            if d0 != d1:
                return (u, v, d0, d1)
    return None


def isometry_to_isomorphism(F: Sequence[int], G0: Graph, G1: Graph) -> TransferResult:
    """Check F preserves d exactly; if so it is a graph isomorphism."""
    F = tuple(F)
    M0, M1 = encode(G0), encode(G1)
    if not _check_bijection(F, G0.vertex_count, G1.vertex_count):
        return TransferResult(False, F, None)
    bad = _first_distance_violation(F, M0, M1)
    return TransferResult(bad is None, F, bad)


def isomorphism_to_isometry(h: Sequence[int], G0: Graph, G1: Graph) -> TransferResult:
    """Certify a graph isomorphism is distance preserving; raises NotIsomorphism otherwise."""
    h = tuple(h)
    if not _check_bijection(h, G0.vertex_count, G1.vertex_count):
        raise NotIsomorphism("map is not a bijection between the vertex sets")
    if len(G0.edges) != len(G1.edges):
        raise NotIsomorphism(f"edge counts differ: {len(G0.edges)} vs {len(G1.edges)}")
    for u in range(G0.vertex_count):
        for v in range(u + 1, G0.vertex_count):
            if G0.adjacent(u, v) != G1.adjacent(h[u], h[v]):
                raise NotIsomorphism(f"pair ({u},{v}) changes edge relation", witness=(u, v))
    M0, M1 = encode(G0), encode(G1)
    bad = _first_distance_violation(h, M0, M1)
    assert bad is None
    return TransferResult(True, h, None)


def _permutations(n: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)


def all_isometries(G0: Graph, G1: Graph) -> set:
    """Every bijection preserving the encoded metric (brute force over permutations)."""
    if G0.vertex_count != G1.vertex_count:
        return set()
    n = G0.vertex_count
    d0 = np.array(encode(G0).table, dtype=np.int64) if n else np.zeros((0, 0), dtype=np.int64)
    d1 = np.array(encode(G1).table, dtype=np.int64) if n else np.zeros((0, 0), dtype=np.int64)
    perms = _permutations(n)
    if n == 0:
        return {()}
    mapped = d1[perms[:, :, None], perms[:, None, :]]
    keep = np.all(mapped == d0[None, :, :], axis=(1, 2))
    return {tuple(int(x) for x in p) for p in perms[keep]}


def all_isomorphisms(G0: Graph, G1: Graph) -> set:
    """Every bijection preserving adjacency, computed independently of the metric encoding."""
    if G0.vertex_count != G1.vertex_count or len(G0.edges) != len(G1.edges):
        return set()
    n = G0.vertex_count
    e1 = G1.edges
    out = set()
    for p in itertools.permutations(range(n)):
        if all(frozenset((p[u], p[v])) in e1 for u, v in (tuple(e) for e in G0.edges)):
            out.add(p)
    return out
