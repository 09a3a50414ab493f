from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lpiso.disintegration import (
    ATOM_CERTIFIED,
    CERTIFIED,
    INCONCLUSIVE,
    UNKNOWN,
    VIOLATED,
    ZERO_CERTIFIED,
    VectorTree,
    all_chain_limits,
    chain_limit,
    default_probes,
    norm_at_most,
    norm_below,
    partition_chains,
    standard_disintegration,
    validate_disintegration,
)
from lpiso.errors import ValidationMissing
from lpiso.lebesgue import Kind, LpSpace, disjointly_supported, pth_power_exact

HALF = Fraction(1, 2)

SHIPPED = [
    LpSpace(Kind.LPN, 1, 3),
    LpSpace(Kind.LP, Fraction(3, 2)),
    LpSpace(Kind.LP01, 3),
    LpSpace(Kind.LPN_SUM, 1, 2),
    LpSpace(Kind.LP_SUM, 3),
]


def test_bisection_depth_one():
    L = LpSpace(Kind.LP01, 2)
    t = standard_disintegration(L, 1)
    assert t.label(()) == L.indicator(0, 1)
    assert [t.label(c) for c in t.children(())] == [L.indicator(0, HALF), L.indicator(HALF, 1)]


def test_basis_fan():
    sp = LpSpace(Kind.LPN, 3, 2)
    t = standard_disintegration(sp, 1)
    assert t.label(()) == sp.atom(0) + sp.atom(1)
    assert [t.label(c) for c in t.children(())] == [sp.atom(0), sp.atom(1)]


def test_infinite_lp_fan_uses_truncated_root():
    sp = LpSpace(Kind.LP, 1)
    t = standard_disintegration(sp, 2)
    assert len(t.children(())) == 4
    assert t.label(()) == sum((sp.atom(i) for i in range(4)), sp.zero())
    assert validate_disintegration(t, probes=default_probes(sp, 4)).passed
    # e_4 lies outside the truncated fan
    assert validate_disintegration(t, probes=[sp.atom(4)]).linearly_dense == VIOLATED


def test_tree_validation_errors():
    L = LpSpace(Kind.LP01, 1)
    with pytest.raises(ValueError):
        VectorTree(L, {(0,): L.indicator(0, 1)}, 2)
    with pytest.raises(ValueError):
        VectorTree(L, {(): L.indicator(0, 1), (0, 0): L.indicator(0, HALF)}, 2)
    with pytest.raises(ValueError):
        VectorTree(L, {(): L.indicator(0, 1), (0,): L.indicator(0, 1)}, 2)
    with pytest.raises(ValueError):
        VectorTree(L, {(): L.indicator(0, 1), (0,): L.indicator(0, HALF)}, 0)


@pytest.mark.parametrize("space", SHIPPED, ids=str)
def test_shipped_trees_pass(space):
    rep = validate_disintegration(standard_disintegration(space, 6), probes=default_probes(space, 16))
    assert rep.nonvanishing and rep.separating and rep.summative
    assert rep.linearly_dense == CERTIFIED


def test_bisection_with_eight_probes():
    L = LpSpace(Kind.LP01, 1)
    rep = validate_disintegration(standard_disintegration(L, 4), probes=default_probes(L, 8))
    assert rep.passed


def test_zero_label_breaks_nonvanishing():
    L = LpSpace(Kind.LP01, 1)
    labels = {(): L.indicator(0, 1), (0,): L.indicator(0, 1).scale(0), (1,): L.indicator(0, HALF)}
    rep = validate_disintegration(VectorTree(L, labels, 1))
    assert not rep.nonvanishing


def test_overlapping_siblings_break_separating():
    L = LpSpace(Kind.LP01, 1)
    labels = {(): L.indicator(0, 1), (0,): L.indicator(0, Fraction(3, 4)), (1,): L.indicator(HALF, 1)}
    rep = validate_disintegration(VectorTree(L, labels, 1))
    assert not rep.separating and not rep.passed


def test_density_violation_needs_uncovered_mass():
    L = LpSpace(Kind.LP01, 1)
    labels = {(): L.indicator(0, HALF), (0,): L.indicator(0, Fraction(1, 4)),
              (1,): L.indicator(Fraction(1, 4), HALF)}
    rep = validate_disintegration(VectorTree(L, labels, 1), probes=[L.indicator(0, 1)])
    assert rep.linearly_dense == VIOLATED
    # a fine dyadic probe inside the support is inconclusive at this depth
    rep = validate_disintegration(VectorTree(L, labels, 1), probes=[L.indicator(0, Fraction(1, 8))])
    assert rep.linearly_dense == INCONCLUSIVE


def test_fan_chains_tie_break():
    sp = LpSpace(Kind.LPN, 1, 2)
    t = standard_disintegration(sp, 1)
    part = partition_chains(t, validate_disintegration(t))
    assert part.chains == [[(), (0,)], [(1,)]]


def test_bisection_chains_depth_two():
    t = standard_disintegration(LpSpace(Kind.LP01, 1), 2)
    part = partition_chains(t, validate_disintegration(t))
    assert part.count == 4
    assert part.chains[0] == [(), (0,), (0, 0)]


def test_single_path_tree_is_one_chain():
    L = LpSpace(Kind.LP01, 1)
    # summative + injective forces branching, so the only single path is a lone root
    t = VectorTree(L, {(): L.indicator(0, 1)}, 3)
    rep = validate_disintegration(t, probes=[])
    assert rep.structural
    assert partition_chains(t, rep).count == 1


def test_partition_requires_structural_report():
    L = LpSpace(Kind.LP01, 1)
    labels = {(): L.indicator(0, 1), (0,): L.indicator(0, Fraction(3, 4)), (1,): L.indicator(HALF, 1)}
    t = VectorTree(L, labels, 1)
    with pytest.raises(ValidationMissing):
        partition_chains(t, validate_disintegration(t))
    with pytest.raises(ValidationMissing):
        partition_chains(t, None)


@pytest.mark.parametrize("space", SHIPPED, ids=str)
def test_chain_partition_properties(space):
    t = standard_disintegration(space, 5)
    part = partition_chains(t, validate_disintegration(t))
    assert sorted(n for c in part.chains for n in c) == sorted(t.nodes())
    for c in part.chains:
        assert all(b[:-1] == a for a, b in zip(c, c[1:]))
    assert all(ch.certified() for ch in part.choices)
    # the child condition, re-checked exactly for integer p
    if space.integer_p:
        for ch in part.choices:
            best = max(pth_power_exact(t.label(c)) for c in t.children(ch.parent))
            assert best <= pth_power_exact(t.label(ch.chosen)) + Fraction(1, 2 ** len(ch.chosen))


def test_atom_chain_limit():
    sp = LpSpace(Kind.LP, 2)
    t = standard_disintegration(sp, 3)
    part = partition_chains(t, validate_disintegration(t))
    lim = chain_limit(t, part, 0, 10)
    assert lim.verdict == ATOM_CERTIFIED and lim.witness == sp.atom(0)
    assert 1 in lim.norm


def test_sum_atom_chains_have_pure_atom_witnesses():
    sp = LpSpace(Kind.LPN_SUM, 1, 3)
    t = standard_disintegration(sp, 4)
    part = partition_chains(t, validate_disintegration(t))
    atoms = [l for l in all_chain_limits(t, part, 10) if l.verdict == ATOM_CERTIFIED]
    assert sorted(l.witness.atomic.coeffs for l in atoms) == [((i, 1),) for i in range(3)]
    assert all(l.witness.continuous.is_zero() for l in atoms)


def test_leftmost_bisection_chain_zero_at_depth_ten():
    t = standard_disintegration(LpSpace(Kind.LP01, 1), 10)
    part = partition_chains(t, validate_disintegration(t))
    assert chain_limit(t, part, 0, 9).verdict == ZERO_CERTIFIED
    assert chain_limit(t, part, 0, 10).verdict == UNKNOWN


def test_shallow_bisection_is_unknown():
    t = standard_disintegration(LpSpace(Kind.LP01, 1), 2)
    part = partition_chains(t, validate_disintegration(t))
    assert chain_limit(t, part, 0, 3).verdict == UNKNOWN


@given(st.integers(1, 60), st.sampled_from([Fraction(1), Fraction(3, 2), Fraction(3)]), st.integers(0, 30))
def test_norm_threshold_helpers(d, p, k):
    # ||1_I||_p^p = 2**-d for |I| = 2**-d, so ||.||_p = 2**(-d/p)
    power = Fraction(1, 2 ** d)
    assert norm_below(power, p, k) == (Fraction(d) / p > k)
    assert norm_at_most(power, p, k) == (Fraction(d) / p >= k)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(SHIPPED), st.integers(1, 5))
def test_atom_witnesses_pairwise_disjoint(space, depth):
    t = standard_disintegration(space, depth)
    part = partition_chains(t, validate_disintegration(t))
    ws = [l.witness for l in all_chain_limits(t, part, 12) if l.verdict == ATOM_CERTIFIED]
    for i, a in enumerate(ws):
        for b in ws[i + 1:]:
            assert disjointly_supported(a, b)
