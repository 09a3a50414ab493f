"""Command line entry point.

Exit codes: 0 certified success, 1 certified violation, 2 inconclusive or
budget exhausted, 64 usage error, 65 malformed input.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import formats
from .disintegration import (
    ATOM_CERTIFIED,
    CERTIFIED,
    UNKNOWN,
    VIOLATED as DENSITY_VIOLATED,
    all_chain_limits,
    default_probes,
    partition_chains,
    standard_disintegration,
    validate_disintegration,
)
from .errors import FormatError, GridTooSmall, LpisoError
from .graphs import encode, isometry_to_isomorphism, isomorphism_to_isometry
from .lebesgue import Kind, LpSpace, format_vector
from .pi01 import HOLDS, TermMaps, check_conditions, search_tables
from .signature import BanachPresentation, StandardPresentation, format_term
from .synthesis import (
    UNKNOWN_VERDICT,
    StageSetEvaluator,
    _target_tree,
    random_scramble,
    synthesize_isometry,
    verify_isometry,
)

EXIT_OK, EXIT_VIOLATION, EXIT_INCONCLUSIVE, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 64, 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass(frozen=True)
class RunConfig:
    precision: int = 10
    depth: int = 4
    budget: int = 10000
    probes: int = 16
    strict: bool = False
    seed: Optional[int] = None
    output: Optional[str] = None

    def __post_init__(self):
        if self.precision < 0 or self.depth < 0:
            raise UsageError("--precision and --depth must be >= 0")
        if self.budget < 1:
            raise UsageError("--budget must be >= 1")
        if self.probes < 0:
            raise UsageError("--probes must be >= 0")


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--precision", "-k", type=int, default=10, help="bit precision k of enclosures")
    p.add_argument("--depth", "-D", type=int, default=4, help="depth budget")
    p.add_argument("--budget", type=int, default=10000, help="search budget (candidate extensions)")
    p.add_argument("--probes", type=int, default=16, help="probe count for linear density")
    p.add_argument("--strict-6-2", dest="strict", action="store_true",
                   help="require the strengthened half-parent child condition when partitioning")
    p.add_argument("--seed", type=int, default=None, help="seed for scramble generation")
    p.add_argument("-o", "--output", default=None, help="also write the report to this file")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lpiso", description="Certified checks for isometric isomorphisms of Lp spaces.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    common = _common()

    p = sub.add_parser("present", parents=[common], help="describe or create a presentation")
    p.add_argument("file", nargs="?", help="presentation file to describe")
    p.add_argument("--kind", choices=[k.value for k in Kind], help="create: space kind")
    p.add_argument("--p", dest="p", default="1", help="create: exponent (rational)")
    p.add_argument("--n", dest="n", type=int, default=None, help="create: atom count for lp_n kinds")
    p.add_argument("--count", type=int, default=8, help="rational points to list")

    for name, helptext in (("disintegrate", "build and validate the standard-shaped tree"),
                           ("partition", "partition the tree into almost norm-maximizing chains"),
                           ("limits", "chain limits with atom/zero verdicts"),
                           ("synthesize", "synthesize an isometry from the standard presentation"),
                           ("stage-sets", "stage verdicts for A1 and A2")):
        q = sub.add_parser(name, parents=[common], help=helptext)
        q.add_argument("file", help="presentation file")
        if name == "synthesize":
            q.add_argument("--count", type=int, default=32, help="rational points to verify and tabulate")
            q.add_argument("--table-out", default=None, help="write the synthesized table here")
        if name == "stage-sets":
            q.add_argument("--stage", type=int, default=None, help="stage s (default: depth)")
            q.add_argument("--kmax", type=int, default=4, help="largest k for A1/A2")
            q.add_argument("--M", dest="M", type=int, default=1, help="M for A2")

    v = sub.add_parser("verify", parents=[common], help="verify a map table between two presentations")
    v.add_argument("source")
    v.add_argument("target")
    v.add_argument("table", help="table file; the map is f(m, last column)")
    v.add_argument("--count", type=int, default=None, help="points to check (default: table rows)")

    r = sub.add_parser("r-check", parents=[common], help="evaluate conditions (1)-(6) on a table pair")
    r.add_argument("source")
    r.add_argument("target")
    r.add_argument("table")

    s = sub.add_parser("r-search", parents=[common], help="bounded search for surviving table prefixes")
    s.add_argument("source")
    s.add_argument("target")
    s.add_argument("--pool", type=int, default=32, help="candidate indices per row")

    e = sub.add_parser("encode-graph", parents=[common], help="graph file to metric presentation")
    e.add_argument("graph")

    t = sub.add_parser("transfer-iso", parents=[common], help="transfer a vertex map between graph and metric views")
    t.add_argument("graph0")
    t.add_argument("graph1")
    t.add_argument("--map", required=True, help="images of vertices 0..n-1, comma or space separated")
    t.add_argument("--direction", choices=["isometry", "isomorphism"], default="isometry",
                   help="treat the map as an isometry (check it is an isomorphism) or vice versa")
    return parser


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc


def _warn_if_hilbert(space: LpSpace) -> None:
    if space.p == 2:
        warnings.warn("p = 2; norms are fine but the isometry structure results need p != 2", stacklevel=2)


def _presentation(path: str):
    P = formats.read_presentation(_read(path))
    if isinstance(P, BanachPresentation):
        _warn_if_hilbert(P.space)
    return P


def _banach(path: str) -> BanachPresentation:
    P = _presentation(path)
    if not isinstance(P, BanachPresentation):
        raise UsageError(f"{path} is not a Banach presentation")
    return P


def _tree_for(P: BanachPresentation, depth: int):
    if isinstance(P, StandardPresentation):
        return standard_disintegration(P.space, depth)
    return _target_tree(P, depth)


# ---------------------------------------------------------------------------
# commands


def cmd_present(args, cfg: RunConfig, out: list) -> int:
    if args.file:
        P = _presentation(args.file)
    elif args.kind:
        try:
            space = LpSpace(Kind(args.kind), Fraction(args.p), args.n)
        except (ValueError, ZeroDivisionError) as exc:
            raise UsageError(str(exc)) from exc
        _warn_if_hilbert(space)
        P = StandardPresentation(space) if cfg.seed is None else random_scramble(space, cfg.seed)
        # a presentation file, not a report: no report header
        out[:] = [formats.write_presentation(P).rstrip("\n")]
        return EXIT_OK
    else:
        raise UsageError("present needs a file or --kind")
    out.append(f"presentation {P!r}")
    pts = P.enumerate_rational_points(args.count)
    if isinstance(P, BanachPresentation):
        for i, t in enumerate(pts):
            out.append(f"point {i} {format_term(t)} = {format_vector(P.point(i))} "
                       f"norm {P.eval_functional('norm', (i,), cfg.precision)}")
    else:
        for i in pts:
            out.append(f"point {i}")
        for i in pts:
            for j in pts:
                if i < j:
                    out.append(f"d {i} {j} {P.eval_metric(i, j, cfg.precision)}")
    return EXIT_OK


def _validated(args, cfg: RunConfig):
    P = _banach(args.file)
    tree = _tree_for(P, cfg.depth)
    report = validate_disintegration(tree, max(cfg.precision, 20), 10, default_probes(P.space, cfg.probes))
    return P, tree, report


def cmd_disintegrate(args, cfg, out) -> int:
    _, tree, report = _validated(args, cfg)
    out.append(report.render())
    out.extend(formats.tree_dump(tree))
    if not (report.nonvanishing and report.separating and report.summative) or report.linearly_dense == DENSITY_VIOLATED:
        return EXIT_VIOLATION
    return EXIT_OK if report.linearly_dense == CERTIFIED else EXIT_INCONCLUSIVE


def cmd_partition(args, cfg, out) -> int:
    _, tree, report = _validated(args, cfg)
    part = partition_chains(tree, report, strict=cfg.strict)
    out.append(f"chains {part.count}")
    certified = all(c.certified() and (not cfg.strict or c.strict_certified()) for c in part.choices)
    out.append(f"child-condition {'certified' if certified else 'not-certified'}")
    for cid, chain in enumerate(part.chains):
        out.append(f"chain {cid} " + " ".join(formats._address(n) for n in chain))
    out.extend(formats.tree_dump(tree, part.assignment))
    return EXIT_OK if certified else EXIT_VIOLATION


def cmd_limits(args, cfg, out) -> int:
    _, tree, report = _validated(args, cfg)
    part = partition_chains(tree, report, strict=cfg.strict)
    limits = all_chain_limits(tree, part, cfg.precision)
    unknown = 0
    for lim in limits:
        witness = format_vector(lim.witness) if lim.witness is not None else "-"
        bound = lim.upper_bounds[-1]
        out.append(f"chain {lim.chain_id} {lim.verdict} witness {witness} error {lim.error} "
                   f"pth-power-upper {bound}")
        unknown += lim.verdict == UNKNOWN
    out.append(f"atoms {sum(l.verdict == ATOM_CERTIFIED for l in limits)} unknown {unknown}")
    return EXIT_INCONCLUSIVE if unknown else EXIT_OK


def cmd_synthesize(args, cfg, out) -> int:
    P = _banach(args.file)
    S = synthesize_isometry(P, cfg.depth, cfg.precision)
    out.append(f"atoms {len(S.atom_images)}")
    for idx, (cid, vec, enc) in sorted(S.atom_images.items()):
        out.append(f"atom {idx} chain {cid} image {format_vector(vec)} norm {enc}")
    for (a, b), vec in sorted(S.continuous_map.items()):
        out.append(f"piece [{a},{b}] image {format_vector(vec)}")
    table = S.table(args.count)
    report = verify_isometry(table, S.source, P, args.count, cfg.precision)
    out.append(report.render())
    if args.table_out:
        from .pi01 import IsometryTable

        t = IsometryTable({m: (v,) for m, v in enumerate(table)}, {}, len(table), 1)
        Path(args.table_out).write_text(formats.write_table(t), encoding="utf-8")
    return _status_code(report.status)


def _status_code(status: str) -> int:
    return {"certified": EXIT_OK, "violated": EXIT_VIOLATION}.get(status, EXIT_INCONCLUSIVE)


def cmd_verify(args, cfg, out) -> int:
    P0, P1 = _presentation(args.source), _presentation(args.target)
    table = formats.read_table(_read(args.table))
    last = table.cols - 1
    F = {m: row[last] for m, row in table.f.items()}
    count = args.count if args.count is not None else table.rows
    if any(m not in F for m in range(count)):
        raise FormatError(f"table does not define f on rows 0..{count - 1}")
    report = verify_isometry(F, P0, P1, count, cfg.precision)
    out.append(report.render())
    return _status_code(report.status)


def cmd_stage_sets(args, cfg, out) -> int:
    P = _banach(args.file)
    tree = _tree_for(P, cfg.depth)
    ev = StageSetEvaluator(tree, max(cfg.precision, 20), strict=cfg.strict)
    stage = cfg.depth if args.stage is None else args.stage
    unknown = 0
    for lim in ev.limits:
        row = [ev.a1(lim.chain_id, k, stage) for k in range(args.kmax + 1)]
        unknown += row.count(UNKNOWN_VERDICT)
        out.append(f"A1 chain {lim.chain_id} " + " ".join(row))
    for node in tree.nodes():
        if len(node) > 1:
            continue
        row = [ev.a2(node, args.M, k, stage) for k in range(args.kmax + 1)]
        unknown += row.count(UNKNOWN_VERDICT)
        out.append(f"A2 node {formats._address(node)} M={args.M} " + " ".join(row))
    return EXIT_INCONCLUSIVE if unknown else EXIT_OK


def cmd_r_check(args, cfg, out) -> int:
    P0, P1 = _presentation(args.source), _presentation(args.target)
    table = formats.read_table(_read(args.table))
    try:
        verdict = check_conditions(table, P0, P1, TermMaps(P0, P1), cfg.depth, cfg.precision)
    except GridTooSmall as exc:
        raise FormatError(str(exc)) from exc
    out.append(verdict.render())
    if verdict.violated():
        return EXIT_VIOLATION
    return EXIT_OK if verdict.overall == HOLDS else EXIT_INCONCLUSIVE


def cmd_r_search(args, cfg, out) -> int:
    P0, P1 = _presentation(args.source), _presentation(args.target)
    result = search_tables(P0, P1, TermMaps(P0, P1), cfg.depth, cfg.precision, cfg.budget, pool=args.pool)
    out.append(result.render())
    if result.exhausted:
        return EXIT_INCONCLUSIVE
    return EXIT_OK if result.survivors else EXIT_VIOLATION


def cmd_encode_graph(args, cfg, out) -> int:
    G = formats.read_graph(_read(args.graph))
    out[:] = [formats.write_presentation(encode(G)).rstrip("\n")]
    return EXIT_OK


def cmd_transfer_iso(args, cfg, out) -> int:
    G0, G1 = formats.read_graph(_read(args.graph0)), formats.read_graph(_read(args.graph1))
    try:
        F = [int(x) for x in args.map.replace(",", " ").split()]
    except ValueError as exc:
        raise UsageError(f"bad --map: {args.map}") from exc
    if len(F) != G0.vertex_count:
        raise UsageError(f"--map has {len(F)} entries for {G0.vertex_count} vertices")
    if args.direction == "isometry":
        res = isometry_to_isomorphism(F, G0, G1)
        out.append(res.render())
        return EXIT_OK if res.ok else EXIT_VIOLATION
    from .errors import NotIsomorphism

    try:
        res = isomorphism_to_isometry(F, G0, G1)
    except NotIsomorphism as exc:
        out.append("status violated")
        out.append(f"not-isomorphism {exc}" + (f" witness {exc.witness}" if exc.witness else ""))
        return EXIT_VIOLATION
    out.append(res.render())
    return EXIT_OK


COMMANDS = {
    "present": cmd_present,
    "disintegrate": cmd_disintegrate,
    "partition": cmd_partition,
    "limits": cmd_limits,
    "synthesize": cmd_synthesize,
    "verify": cmd_verify,
    "stage-sets": cmd_stage_sets,
    "r-check": cmd_r_check,
    "r-search": cmd_r_search,
    "encode-graph": cmd_encode_graph,
    "transfer-iso": cmd_transfer_iso,
}


def run(argv: Optional[Sequence[str]] = None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        code = _dispatch(parser, argv, stdout, stderr)
    for w in caught:
        print(f"warning: {w.message}", file=stderr)
    return code


def _dispatch(parser, argv, stdout, stderr) -> int:
    try:
        args = parser.parse_args(argv)
        if not args.command:
            raise UsageError("missing command; see lpiso --help")
        cfg = RunConfig(args.precision, args.depth, args.budget, args.probes, args.strict, args.seed,
                        args.output)
        out = [formats.report_header(args.command)]
        code = COMMANDS[args.command](args, cfg, out)
    except UsageError as exc:
        print(f"usage error: {exc}", file=stderr)
        return EXIT_USAGE
    except (FormatError, ValueError) as exc:
        print(f"malformed input: {exc}", file=stderr)
        return EXIT_DATA
    except LpisoError as exc:
        print(f"inconclusive: {type(exc).__name__}: {exc}", file=stderr)
        return EXIT_INCONCLUSIVE
    text = "\n".join(out) + "\n"
    stdout.write(text)
    if cfg.output:
        Path(cfg.output).write_text(text, encoding="utf-8")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
