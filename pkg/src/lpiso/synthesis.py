"""Scrambled presentations, synthesis of an isometry from chain limits, verification, stage sets.

A scrambled presentation is the image of the standard one under a hidden
isometry ``H`` (signed atom permutation plus a signed rearrangement of the
level-``L`` dyadic pieces of [0,1]).  The synthesis pipeline only sees the
generator vectors; ``H`` is kept as ground truth for tests.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional, Sequence, Union

from .disintegration import (
    ATOM_CERTIFIED,
    UNKNOWN,
    ChainLimit,
    ChainPartition,
    VectorTree,
    all_chain_limits,
    norm_at_most,
    norm_below,
    partition_chains,
    standard_disintegration,
    validate_disintegration,
)
from .errors import AtomCountMismatch, PrecisionExhausted, UnknownChainLimit, UnsupportedSpace
from .exact import DyadicInterval
from .lebesgue import (
    Kind,
    LpSpace,
    LpVector,
    SeqVector,
    StepFunction,
    norm,
    standard_generator,
)
from .signature import (
    BanachPresentation,
    Presentation,
    StandardPresentation,
    Term,
    make_term,
    term_add,
    term_scale,
)

__all__ = [
    "HiddenIsometry",
    "ScrambledPresentation",
    "random_scramble",
    "standard_term",
    "dyadic_index",
    "SynthesizedIsometry",
    "synthesize_isometry",
    "recover_projection",
    "chains_below",
    "VerificationReport",
    "verify_isometry",
    "evaluate_A1",
    "evaluate_A2",
    "StageSetEvaluator",
]

IN, OUT, UNKNOWN_VERDICT = "in", "out", "unknown"


# ---------------------------------------------------------------------------
# hidden isometries


@dataclass(frozen=True)
class HiddenIsometry:
    """Signed atom permutation on the first ``len(perm)`` atoms plus a signed piece rearrangement.

    Atom ``i`` goes to ``atom_signs[i] * e_{perm[i]}`` (atoms beyond the
    permuted block are fixed).  Piece ``j`` of level ``level`` is moved onto
    piece ``pieces[j]`` and multiplied by ``piece_signs[j]``.
    """

    perm: tuple = ()
    atom_signs: tuple = ()
    level: int = 0
    pieces: tuple = (0,)
    piece_signs: tuple = (1,)

    def __post_init__(self):
        if sorted(self.perm) != list(range(len(self.perm))):
            raise ValueError("perm must be a permutation of 0..len-1")
        if len(self.atom_signs) != len(self.perm) or any(s not in (1, -1) for s in self.atom_signs):
            raise ValueError("atom_signs must be +-1, one per permuted atom")
        if sorted(self.pieces) != list(range(1 << self.level)):
            raise ValueError("pieces must permute the 2**level dyadic pieces")
        if len(self.piece_signs) != len(self.pieces) or any(s not in (1, -1) for s in self.piece_signs):
            raise ValueError("piece_signs must be +-1, one per piece")

    def inverse(self) -> HiddenIsometry:
        inv = [0] * len(self.perm)
        inv_signs = [1] * len(self.perm)
        for i, j in enumerate(self.perm):
            inv[j] = i
            inv_signs[j] = self.atom_signs[i]
        pinv = [0] * len(self.pieces)
        psigns = [1] * len(self.pieces)
        for i, j in enumerate(self.pieces):
            pinv[j] = i
            psigns[j] = self.piece_signs[i]
        return HiddenIsometry(tuple(inv), tuple(inv_signs), self.level, tuple(pinv), tuple(psigns))

    def apply_atoms(self, a: SeqVector) -> SeqVector:
        out = {}
        for i, q in a.coeffs:
            if i < len(self.perm):
                out[self.perm[i]] = self.atom_signs[i] * q
            else:
                out[i] = q
        return SeqVector.from_mapping(out)

    def apply_steps(self, f: StepFunction) -> StepFunction:
        if f.is_zero():
            return f
        size = Fraction(1, 1 << self.level)
        result = StepFunction()
        for j, target in enumerate(self.pieces):
            a, b = j * size, (j + 1) * size
            shift = (target - j) * size
            sign = self.piece_signs[j]
            for lo, hi, v in f.restrict(a, b).pieces():
                if v == 0 or hi <= a or lo >= b:
                    continue
                lo, hi = max(lo, a), min(hi, b)
                result = result + StepFunction.indicator(lo + shift, hi + shift, sign * v)
        return result

    def __call__(self, v: LpVector) -> LpVector:
        return LpVector(v.space, self.apply_atoms(v.atomic), self.apply_steps(v.continuous))

    def describe(self) -> str:
        return (f"perm={list(self.perm)} signs={list(self.atom_signs)} level={self.level} "
                f"pieces={list(self.pieces)} piece_signs={list(self.piece_signs)}")


IDENTITY = HiddenIsometry()


class ScrambledPresentation(BanachPresentation):
    """Presentation whose j-th generator is ``H(standard generator j)``."""

    def __init__(self, space: LpSpace, hidden: HiddenIsometry = IDENTITY):
        if not space.kind.has_atoms and hidden.perm:
            raise ValueError(f"{space} has no atoms to permute")
        if not space.kind.has_continuum and hidden.level:
            raise ValueError(f"{space} has no continuous part to rearrange")
        if space.kind.finite_atoms and len(hidden.perm) > space.n:
            raise ValueError("atom permutation longer than the atom count")
        self.hidden = hidden
        super().__init__(space, lambda i: hidden(standard_generator(space, i)),
                         space.generator_count(), name="scrambled")

    def certify_hidden(self, count: int = 16, k: int = 20) -> bool:
        """Generator norms agree with the standard ones (enclosures overlap)."""
        gc = self.generator_count
        count = count if gc is None else min(count, gc)
        for j in range(count):
            a = norm(self.generator(j), k)
            b = norm(standard_generator(self.space, j), k)
            if not a.overlaps(b):
                return False
        return True


def random_scramble(space: LpSpace, seed: int, max_level: int = 3, atom_block: int = 8) -> ScrambledPresentation:
    rng = random.Random(seed)
    perm: tuple = ()
    signs: tuple = ()
    if space.kind.has_atoms:
        n = space.n if space.kind.finite_atoms else atom_block
        p = list(range(n))
        rng.shuffle(p)
        perm = tuple(p)
        signs = tuple(rng.choice((1, -1)) for _ in range(n))
    level, pieces, psigns = 0, (0,), (1,)
    if space.kind.has_continuum:
        level = rng.randint(1, max_level)
        pc = list(range(1 << level))
        rng.shuffle(pc)
        pieces = tuple(pc)
        psigns = tuple(rng.choice((1, -1)) for _ in pc)
    return ScrambledPresentation(space, HiddenIsometry(perm, signs, level, pieces, psigns))


def dyadic_index(a: Fraction, b: Fraction) -> int:
    """Breadth-first index of the dyadic interval [a, b]."""
    length = b - a
    if length <= 0 or length.numerator != 1 or length.denominator & (length.denominator - 1):
        raise ValueError(f"[{a}, {b}] is not a dyadic interval")
    level = length.denominator.bit_length() - 1
    j = a * length.denominator
    if j.denominator != 1:
        raise ValueError(f"[{a}, {b}] is not aligned")
    return (1 << level) - 1 + int(j)


def _dyadic_blocks(a: Fraction, b: Fraction):
    """Canonical split of a dyadic-endpoint interval into maximal aligned dyadic intervals."""
    out = []
    while a < b:
        size = Fraction(1)
        while not ((a / size).denominator == 1 and a + size <= b):
            size /= 2
        out.append((a, a + size))
        a += size
    return out


def standard_term(v: LpVector) -> Term:
    """Write a vector of a standard space as a term in its standard generators."""
    space = v.space
    coeffs = []
    for i, q in v.atomic.coeffs:
        if space.kind is Kind.LP_SUM:
            coeffs.append((2 * i, q))
        else:
            coeffs.append((i, q))
    offset = space.n if space.kind is Kind.LPN_SUM else 0
    for a, b, val in v.continuous.pieces():
        if val == 0:
            continue
        for lo, hi in _dyadic_blocks(a, b):
            idx = dyadic_index(lo, hi)
            gen = 2 * idx + 1 if space.kind is Kind.LP_SUM else idx + offset
            coeffs.append((gen, val))
    return make_term(coeffs)


# ---------------------------------------------------------------------------
# synthesis


@dataclass
class SynthesizedIsometry:
    """T from the standard presentation onto a target presentation.

    ``atom_images[k] = (chain id, normalized witness, norm enclosure of the raw witness)``;
    ``continuous_map`` sends dyadic intervals to recovered continuous vectors.
    ``generator_terms`` gives T of every standard generator as a target term.
    """

    source: StandardPresentation
    target: BanachPresentation
    tree: VectorTree
    partition: ChainPartition
    limits: list
    atom_images: dict
    continuous_map: dict
    generator_terms: dict
    depth: int
    precision: int

    def image_term(self, source_term: Term) -> Term:
        out: Term = ()
        for j, q in source_term:
            if j not in self.generator_terms:
                self.generator_terms[j] = self._generator_term(j)
            out = term_add(out, term_scale(q, self.generator_terms[j]))
        return out

    def _generator_term(self, j: int) -> Term:
        v = standard_generator(self.source.space, j)
        term: Term = ()
        for i, q in v.atomic.coeffs:
            if i not in self.atom_terms:
                raise PrecisionExhausted(f"atom {i} beyond the synthesized atoms")
            term = term_add(term, term_scale(q, self.atom_terms[i]))
        for a, b, val in v.continuous.pieces():
            if val == 0:
                continue
            for lo, hi in _dyadic_blocks(a, b):
                term = term_add(term, term_scale(val, self._interval_term(lo, hi)))
        return term

    def _interval_term(self, a, b) -> Term:
        if (a, b) in self.interval_terms:
            return self.interval_terms[(a, b)]
        mid = (a + b) / 2
        if (a, mid) not in self.interval_terms and b - a <= Fraction(1, 1 << self.depth):
            raise PrecisionExhausted(f"[{a},{b}] finer than depth {self.depth}")
        return term_add(self._interval_term(a, mid), self._interval_term(mid, b))

    def apply(self, v: LpVector) -> LpVector:
        return self.target.evaluate(self.image_term(standard_term(v)))

    def table(self, count: int) -> list:
        """Target index of T(x_m) for the first ``count`` source rational points."""
        return [self.target.index_of(self.image_term(self.source.term(m))) for m in range(count)]

    def __post_init__(self):
        self.atom_terms = {}
        self.interval_terms = {}


def _target_tree(target: BanachPresentation, depth: int) -> VectorTree:
    """Standard tree shape with every label replaced by its image generator term."""
    std = standard_disintegration(target.space, depth)
    labels, terms = {}, {}
    for node, v in std.labels.items():
        t = standard_term(v)
        terms[node] = t
        labels[node] = target.evaluate(t)
    return VectorTree(target.space, labels, depth, terms=terms, meta=std.meta)


def chains_below(part: ChainPartition, node) -> list:
    """Ids of chains whose nodes all extend ``node`` or pass through it (their limits are components of it)."""
    return [cid for cid, chain in enumerate(part.chains) if chain[-1][: len(node)] == node]


def recover_projection(tree: VectorTree, part: ChainPartition, limits: Sequence[ChainLimit],
                       node, k: int):
    """P(phi(node)): the label minus every atom limit that is a component of it.

    A chain limit is a component of ``phi(node)`` exactly when the chain runs
    through or below ``node``.  An undecided chain blocks the computation only
    if its last label still carries atomic mass; otherwise its limit is a
    component of a purely continuous vector and hence zero.

    Returns ``(vector, error bound, term or None)``.
    """
    if node not in tree:
        raise KeyError(f"{node} not in tree")
    by_id = {lim.chain_id: lim for lim in limits}
    vec = tree.label(node)
    term = tree.terms.get(node)
    error = Fraction(1, 2 ** k)
    for cid in chains_below(part, node):
        lim = by_id.get(cid)
        if lim is None or lim.verdict == UNKNOWN:
            last = tree.label(part.chains[cid][-1])
            if last.atomic.is_zero():
                continue
            raise UnknownChainLimit(f"chain {cid} below {node} is unknown at depth {tree.depth}")
        if lim.verdict == ATOM_CERTIFIED:
            vec = vec - lim.witness
            error += lim.error
            if term is not None:
                term = term_add(term, term_scale(-1, tree.terms[lim.nodes[-1]]))
    return vec, error, term


def synthesize_isometry(target: BanachPresentation, depth: int, k: int) -> SynthesizedIsometry:
    """Assemble T: atoms go to normalized chain limits, dyadic indicators to projected labels."""
    space = target.space
    if space.kind not in (Kind.LPN_SUM, Kind.LPN, Kind.LP, Kind.LP01, Kind.LP_SUM):
        raise UnsupportedSpace(f"cannot synthesize for {space}")
    tree = _target_tree(target, depth)
    report = validate_disintegration(tree, k)
    part = partition_chains(tree, report)
    limits = all_chain_limits(tree, part, k)
    atoms = [lim for lim in limits if lim.verdict == ATOM_CERTIFIED]
    expected = space.n if space.kind.finite_atoms else (tree.meta.get("width", 0) if space.kind.has_atoms else 0)
    if len(atoms) != expected:
        raise AtomCountMismatch(f"found {len(atoms)} atoms, expected {expected}")

    result = SynthesizedIsometry(StandardPresentation(space), target, tree, part, limits, {}, {}, {},
                                 depth, k)
    for idx, lim in enumerate(sorted(atoms, key=lambda l: l.chain_id)):
        (_, coeff), = lim.witness.atomic.coeffs
        scale = 1 / abs(coeff)
        result.atom_images[idx] = (lim.chain_id, lim.witness.scale(scale), lim.norm)
        result.atom_terms[idx] = term_scale(scale, tree.terms[lim.nodes[-1]])

    if space.kind.has_continuum:
        for node in tree.nodes():
            interval = _node_interval(tree, node)
            if interval is None:
                continue
            vec, _, term = recover_projection(tree, part, limits, node, k)
            result.continuous_map[interval] = vec
            result.interval_terms[interval] = term
        if (Fraction(0), Fraction(1)) not in result.interval_terms:
            half = Fraction(1, 2)
            result.interval_terms[(Fraction(0), Fraction(1))] = term_add(
                result.interval_terms[(Fraction(0), half)], result.interval_terms[(half, Fraction(1))])
    return result


def _node_interval(tree: VectorTree, node):
    """Dyadic interval a continuous node of a standard-shaped tree stands for."""
    shape = tree.meta.get("shape")
    if shape == "bisection":
        bits = node
    elif shape == "fan" and tree.space.kind.has_continuum and node:
        w = tree.meta["width"]
        if node[0] < w:
            return None
        bits = (node[0] - w,) + node[1:]
    else:
        return None
    a, size = Fraction(0), Fraction(1)
    for bit in bits:
        size /= 2
        a += bit * size
    return (a, a + size)


# ---------------------------------------------------------------------------
# verification


@dataclass
class VerificationReport:
    passed: bool
    checked: int
    inconclusive: int
    violation: Optional[dict] = None
    pairs: list = field(default_factory=list)

    @property
    def status(self) -> str:
        if self.violation is not None:
            return "violated"
        return "certified" if self.passed else "inconclusive"

    def render(self) -> str:
        lines = [f"status {self.status}", f"checked {self.checked}", f"inconclusive {self.inconclusive}"]
        if self.violation:
            v = self.violation
            lines.append(f"violation {v['clause']} at {v['at']} discrepancy {v['discrepancy']}")
        for (i, j), enc in self.pairs:
            lines.append(f"pair {i} {j} {enc}")
        return "\n".join(lines)


TableLike = Union[Mapping[int, int], Sequence[int], Callable[[int], int]]


def _lookup(F: TableLike):
    if callable(F):
        return F, lambda i: True
    if isinstance(F, Mapping):
        return F.__getitem__, F.__contains__
    return F.__getitem__, lambda i: 0 <= i < len(F)


def verify_isometry(F: TableLike, P0: Presentation, P1: Presentation, N: int, k: int,
                    scalars: Sequence = (-1, 2, Fraction(1, 2)), keep_pairs: bool = False) -> VerificationReport:
    """Certify ``|d(x_i,x_j) - d(y_F(i),y_F(j))| <= 4*2**-k`` on the first N points,
    plus the operation and constant clauses where the signature has them.
    """
    get, has = _lookup(F)
    tol = Fraction(4, 2 ** k)
    checked = inconclusive = 0
    pairs = []

    def judge(enc: DyadicInterval, clause: str, at) -> Optional[dict]:
        nonlocal checked, inconclusive
        checked += 1
        if enc.lo > tol:
            return {"clause": clause, "at": at, "discrepancy": enc}
        if enc.hi > tol:
            inconclusive += 1
        return None

    for i in range(N):
        for j in range(i, N):
            d0 = P0.eval_metric(i, j, k)
            d1 = P1.eval_metric(get(i), get(j), k)
            enc = abs(d0 - d1)
            if keep_pairs:
                pairs.append(((i, j), enc))
            bad = judge(enc, "distance", (i, j))
            if bad:
                return VerificationReport(False, checked, inconclusive, bad, pairs)

    if P0.signature.kind_or_none("+") == "operation":
        for i in range(N):
            for j in range(i, N):
                z = P0.apply("+", (i, j))
                if not has(z):
                    continue
                w = P1.apply("+", (get(i), get(j)))
                bad = judge(P1.eval_metric(get(z), w, k), "operation +", (i, j))
                if bad:
                    return VerificationReport(False, checked, inconclusive, bad, pairs)
        for s in scalars:
            sym = f"*{s}"
            for i in range(N):
                z = P0.apply(sym, (i,))
                if not has(z):
                    continue
                w = P1.apply(sym, (get(i),))
                bad = judge(P1.eval_metric(get(z), w, k), f"operation {sym}", (i,))
                if bad:
                    return VerificationReport(False, checked, inconclusive, bad, pairs)
        for c in P0.signature.constants:
            z0, z1 = P0.constant_index(c, k), P1.constant_index(c, k)
            if has(z0):
                bad = judge(P1.eval_metric(get(z0), z1, k), f"constant {c}", (z0,))
                if bad:
                    return VerificationReport(False, checked, inconclusive, bad, pairs)
    return VerificationReport(inconclusive == 0, checked, inconclusive, None, pairs)


# ---------------------------------------------------------------------------
# stage sets


def evaluate_A1(limits: Sequence[ChainLimit], n: int, k: int, stage: int) -> str:
    """Membership of <n,k> in {||g_n||_p >= 2**-k} from stage-``stage`` information."""
    lim = limits[n]
    if lim.atom_visible(stage) and lim.norm is not None and lim.norm.lo >= Fraction(1, 2 ** k):
        return IN
    ub = lim.stage_upper(stage)
    if ub is not None and norm_below(ub, lim.p, k):
        return OUT
    return UNKNOWN_VERDICT


def evaluate_A2(tree: VectorTree, part: ChainPartition, limits: Sequence[ChainLimit], node, M: int,
                k: int, stage: int) -> str:
    """Membership of <node,M,k> in {||sum_{n>=M} chi_{C_n}(node) g_n||_p <= 2**-k}.

    The node lies in exactly one chain, so the sum has at most one term.
    """
    cid = part.chain_of(node)
    if cid < M:
        return IN
    lim = limits[cid]
    ub = lim.stage_upper(stage)
    if ub is not None and norm_at_most(ub, lim.p, k):
        return IN
    if lim.atom_visible(stage) and lim.norm is not None and lim.norm.lo > Fraction(1, 2 ** k):
        return OUT
    return UNKNOWN_VERDICT


class StageSetEvaluator:
    """Stage-indexed verdicts for A1 and A2 over one validated tree."""

    def __init__(self, tree: VectorTree, k_precision: int = 20, strict: bool = False):
        self.tree = tree
        self.report = validate_disintegration(tree, k_precision)
        self.partition = partition_chains(tree, self.report, strict=strict)
        self.limits = all_chain_limits(tree, self.partition, k_precision)

    def a1(self, n: int, k: int, stage: int) -> str:
        return evaluate_A1(self.limits, n, k, stage)

    def a2(self, node, M: int, k: int, stage: int) -> str:
        return evaluate_A2(self.tree, self.partition, self.limits, node, M, k, stage)

    def a1_table(self, k_max: int, stage: int) -> dict:
        return {(n, k): self.a1(n, k, stage) for n in range(len(self.limits)) for k in range(k_max + 1)}
