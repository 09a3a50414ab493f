import io
import subprocess
import sys
from fractions import Fraction

import pytest

from lpiso.cli import RunConfig, UsageError, run
from lpiso.formats import write_graph, write_table
from lpiso.graphs import Graph
from lpiso.lebesgue import Kind, LpSpace
from lpiso.pi01 import IsometryTable
from lpiso.signature import StandardPresentation
from lpiso.synthesis import standard_term


def lpiso(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    def present(name, *flags):
        path = tmp_path / name
        code, _, _ = lpiso("present", *flags, "-o", path)
        assert code == 0
        return path
    return present


def test_verify_identity(files, tmp_path):
    src = files("l1.txt", "--kind", "lp_n", "--p", "1", "--n", "2")
    tab = tmp_path / "id.txt"
    tab.write_text(write_table(IsometryTable.identity(20, 1)))
    code, out, _ = lpiso("verify", src, src, tab)
    assert code == 0
    assert out.startswith("lpiso-report 1 verify\n") and "certified" in out


def test_r_check_distance_violation(files, tmp_path):
    src = files("l1.txt", "--kind", "lp_n", "--p", "1", "--n", "2")
    sp = LpSpace(Kind.LPN, 1, 2)
    P = StandardPresentation(sp)

    def idx(v):
        return P.index_of(standard_term(v))

    table = IsometryTable.from_functions(lambda m, n: idx(P.point(m).scale(2)),
                                         lambda m, n: idx(P.point(m).scale(Fraction(1, 2))), 40, 5)
    tab = tmp_path / "double.txt"
    tab.write_text(write_table(table))
    code, out, _ = lpiso("r-check", src, src, tab, "-D", 4, "-k", 12)
    assert code == 1
    line2 = next(l for l in out.splitlines() if l.startswith("condition 2 "))
    assert "violated-certified" in line2 and "witness" in line2


def test_limits_at_insufficient_depth(files):
    src = files("sum.txt", "--kind", "lpn_sum", "--p", "1", "--n", "2")
    code, out, _ = lpiso("limits", src, "-D", 3, "-k", 10)
    assert code == 2 and "unknown-at-depth" in out


def test_limits_on_atoms_only(files):
    src = files("l3.txt", "--kind", "lp_n", "--p", "3", "--n", "3")
    code, out, _ = lpiso("limits", src, "-D", 2, "-k", 10)
    assert code == 0 and "atoms 3 unknown 0" in out


def test_usage_errors():
    assert lpiso()[0] == 64
    assert lpiso("frobnicate")[0] == 64
    assert lpiso("present")[0] == 64
    assert lpiso("present", "--kind", "lp", "--p", "1/2")[0] == 64
    assert lpiso("limits", "x", "--budget", "0")[0] == 64


def test_malformed_input(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("not a presentation\n")
    code, _, err = lpiso("limits", bad)
    assert code == 65 and "malformed" in err
    assert lpiso("limits", tmp_path / "missing.txt")[0] == 65


def test_p2_warning():
    code, _, err = lpiso("present", "--kind", "lp", "--p", "2")
    assert code == 0 and "p = 2" in err


def test_graph_round_trip_through_cli(tmp_path):
    g0, g1 = tmp_path / "c4.txt", tmp_path / "c4b.txt"
    g0.write_text(write_graph(Graph.from_pairs(4, [(0, 1), (1, 2), (2, 3), (3, 0)])))
    g1.write_text(write_graph(Graph.from_pairs(4, [(0, 2), (2, 1), (1, 3), (3, 0)])))
    assert lpiso("transfer-iso", g0, g1, "--map", "0,2,1,3")[0] == 0
    assert lpiso("transfer-iso", g0, g1, "--map", "0,1,2,3")[0] == 1
    assert lpiso("transfer-iso", g0, g1, "--map", "0,2,1,3", "--direction", "isomorphism")[0] == 0
    metric = tmp_path / "m.txt"
    assert lpiso("encode-graph", g0, "-o", metric)[0] == 0
    code, out, _ = lpiso("r-search", metric, metric, "-D", 2, "--pool", 4)
    assert code == 0 and "survivor f=[0,1,2]" in out


def test_r_search_budget(files):
    src = files("l1.txt", "--kind", "lp_n", "--p", "1", "--n", "2")
    assert lpiso("r-search", src, src, "-D", 2, "--budget", 3)[0] == 2


def test_synthesize_scramble(files, tmp_path):
    target = files("s.txt", "--kind", "lpn_sum", "--p", "1", "--n", "2", "--seed", 3)
    table = tmp_path / "t.txt"
    code, out, _ = lpiso("synthesize", target, "-D", 4, "--count", 16, "--table-out", table)
    assert code == 0 and table.exists()
    src = files("std.txt", "--kind", "lpn_sum", "--p", "1", "--n", "2")
    assert lpiso("verify", src, target, table, "--count", 16)[0] == 0


def test_reports_are_byte_identical(files):
    target = files("s.txt", "--kind", "lp_sum", "--p", "3", "--seed", 7)
    runs = {lpiso("synthesize", target, "-D", 3, "--count", 8)[1] for _ in range(3)}
    assert len(runs) == 1
    runs = {lpiso("stage-sets", target, "-D", 4)[1] for _ in range(2)}
    assert len(runs) == 1


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig(-1, 4, 10, 16, False, None, None)
    with pytest.raises(UsageError):
        RunConfig(10, 4, 0, 16, False, None, None)


def test_console_script_entry():
    proc = subprocess.run([sys.executable, "-m", "lpiso.cli", "present", "--kind", "lp", "--p", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("lpiso-presentation 1")
