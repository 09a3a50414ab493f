from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from lpiso.errors import FormatError
from lpiso.formats import (
    read_graph,
    read_presentation,
    read_table,
    report_header,
    tree_dump,
    write_graph,
    write_presentation,
    write_table,
)
from lpiso.disintegration import standard_disintegration
from lpiso.graphs import Graph, encode
from lpiso.lebesgue import Kind, LpSpace
from lpiso.pi01 import IsometryTable
from lpiso.signature import StandardPresentation
from lpiso.synthesis import random_scramble


@pytest.mark.parametrize("space", [LpSpace(Kind.LPN, 1, 3), LpSpace(Kind.LP_SUM, Fraction(3, 2)),
                                   LpSpace(Kind.LP01, 3)], ids=str)
def test_standard_presentation_round_trip(space):
    text = write_presentation(StandardPresentation(space))
    back = read_presentation(text)
    assert back.space == space and write_presentation(back) == text


@pytest.mark.parametrize("seed", range(4))
def test_scrambled_round_trip(seed):
    P = random_scramble(LpSpace(Kind.LPN_SUM, 3, 3), seed)
    back = read_presentation(write_presentation(P))
    assert back.hidden == P.hidden
    assert all(back.point(m) == P.point(m) for m in range(30))


def test_metric_round_trip():
    M = encode(Graph.from_pairs(4, [(0, 1), (2, 3)]))
    back = read_presentation(write_presentation(M))
    assert back.table == M.table


@pytest.mark.parametrize("text", [
    "",
    "lpiso-presentation 2\nsignature banach\n",
    "lpiso-presentation 1\nsignature banach\nkind lp\np 1\n",
    "lpiso-presentation 1\nsignature banach\nkind lq\np 1\ngenerators standard\n",
    "lpiso-presentation 1\nsignature banach\nkind lp\np 1/2\ngenerators standard\n",
    "lpiso-presentation 1\nsignature banach\nkind lp\np x\ngenerators standard\n",
    "lpiso-presentation 1\nsignature banach\nkind lp\np 1\np 2\ngenerators standard\n",
    "lpiso-presentation 1\nsignature metric\npoints 2\nd 0 5 1\n",
    "lpiso-presentation 1\nsignature metric\npoints 3\nd 0 1 1\nd 1 2 1\nd 0 2 -1\n",
])
def test_malformed_presentations(text):
    with pytest.raises(FormatError):
        read_presentation(text)


@settings(max_examples=60)
@given(st.integers(1, 6).flatmap(lambda rows: st.tuples(
    st.just(rows), st.integers(1, 5),
    st.lists(st.integers(0, 10 ** 9), min_size=60, max_size=60))))
def test_table_round_trip(data):
    rows, cols, vals = data
    it = iter(vals)
    t = IsometryTable.from_functions(lambda m, n: next(it), lambda m, n: next(it), rows, cols)
    back = read_table(write_table(t))
    assert back.key() == t.key()


@pytest.mark.parametrize("text", ["", "f 0 0\n", "h 0 0 1\n", "f 0 0 -1\n", "f 0 0 1\nf 0 0 2\n",
                                  "f 0 0 1\nf 0 2 1\n", "f a 0 1\n"])
def test_malformed_tables(text):
    with pytest.raises(FormatError):
        read_table(text)


def test_graph_round_trip():
    G = Graph.from_pairs(5, [(3, 1), (0, 4)])
    text = write_graph(G)
    assert text == "5\n0 4\n1 3\n"
    assert read_graph(text) == G


@pytest.mark.parametrize("text", ["", "3 3\n", "3\n0\n", "3\n0 7\n", "x\n"])
def test_malformed_graphs(text):
    with pytest.raises(FormatError):
        read_graph(text)


def test_comments_ignored():
    assert read_graph("# a path\n3\n0 1  # edge\n1 2\n").sorted_edges() == [(0, 1), (1, 2)]


def test_tree_dump_and_header():
    lines = list(tree_dump(standard_disintegration(LpSpace(Kind.LPN, 1, 2), 1)))
    assert lines[0].startswith("<> ; ") and lines[1].startswith("<0> ; ")
    assert report_header("verify") == "lpiso-report 1 verify"
