"""Command-line front end: ``artin-relhyp <subcommand> --group FILE [flags]``.

Every subcommand prints ``key=value`` records, one per line, in a fixed key
order.  ``--text`` switches to a human-oriented layout carrying the same
numbers.  Exit codes: 0 ok, 1 assertion failure, 2 usage error, 3 resource cap.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from importlib import resources
from pathlib import Path

import numpy as np

from . import acceptance
from .artin import (
    NotExtraLargeError,
    dehn_solve,
    find_violation,
    parabolic_intersection_check,
)
from .coned import (
    OutsideBallError,
    ResourceCapError,
    all_geodesics,
    build_ball,
    hausdorff_X,
)
from .dihedral import (
    DihedralPair,
    ForeignGeneratorError,
    SearchBounds,
    amalgam_nf,
    build_relator,
    garside_nf,
    min_syllable_rep,
)
from .relhyp import (
    BIGON_BOUND,
    DeltaRow,
    bigon_scan,
    delta_report,
    sample_pipeline_paths,
    verify_pipeline,
)
from .words import INF, GroupSpec, Word, format_word, parse_word

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CAP = 0, 1, 2, 3


class GroupFileError(ValueError):
    pass


class UsageError(ValueError):
    pass


def parse_group_file(text: str) -> GroupSpec:
    n = None
    labels: dict = {}
    seen_at: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "n" and len(parts) == 2:
            if n is not None:
                raise GroupFileError(f"line {lineno}: duplicate 'n' line")
            try:
                n = int(parts[1])
            except ValueError:
                raise GroupFileError(f"line {lineno}: bad generator count {parts[1]!r}") from None
            if n < 1:
                raise GroupFileError(f"line {lineno}: n must be positive")
            continue
        if parts[0] == "m" and len(parts) == 4:
            if n is None:
                raise GroupFileError(f"line {lineno}: 'm' line before 'n' line")
            try:
                i, j = int(parts[1]), int(parts[2])
            except ValueError:
                raise GroupFileError(f"line {lineno}: bad generator index") from None
            if not (1 <= i <= n and 1 <= j <= n) or i == j:
                raise GroupFileError(f"line {lineno}: generator pair ({i}, {j}) out of range")
            if parts[3] == "inf":
                value = INF
            else:
                try:
                    value = int(parts[3])
                except ValueError:
                    raise GroupFileError(f"line {lineno}: bad label {parts[3]!r}") from None
                if value < 2:
                    raise GroupFileError(f"line {lineno}: label m={value} must be >= 2 or inf")
            key = (min(i, j), max(i, j))
            if key in labels and labels[key] != value:
                raise GroupFileError(
                    f"line {lineno}: conflicting entries for pair {key} "
                    f"({labels[key]} at line {seen_at[key]}, {value} here)")
            labels[key] = value
            seen_at[key] = lineno
            continue
        raise GroupFileError(f"line {lineno}: unrecognised line {raw.strip()!r}")
    if n is None:
        raise GroupFileError("missing 'n' line")
    return GroupSpec(n, labels)


def default_group_path() -> Path:
    return Path(str(resources.files("artin_relhyp") / "data" / "e7.group"))


def load_group(path) -> GroupSpec:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read group file {path}: {exc}") from None
    return parse_group_file(text)


# -- output -------------------------------------------------------------------

class Out:
    def __init__(self, text: bool, stream=None):
        self.text = text
        self.stream = stream or sys.stdout

    def record(self, kind: str, **fields) -> None:
        if self.text:
            body = ", ".join(f"{k} {v}" for k, v in fields.items())
            print(f"{kind}: {body}" if body else kind, file=self.stream)
        else:
            body = " ".join(f"{k}={v}" for k, v in fields.items())
            print(f"{kind} {body}".rstrip(), file=self.stream)

    def raw(self, line: str) -> None:
        print(line, file=self.stream)


def _tok(w: Word) -> str:
    return format_word(w).replace(" ", ".")


def _word(args, spec, attr="word") -> Word:
    text = getattr(args, attr)
    try:
        return parse_word(text, spec.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _pair(spec, values) -> DihedralPair:
    i, j = values
    try:
        return DihedralPair.from_spec(spec, i, j)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _flags(spec: GroupSpec) -> dict:
    return {"extra_large": int(spec.is_extra_large), "theorem_scope": int(spec.is_theorem_scope),
            "free": int(spec.is_free)}


# -- subcommands --------------------------------------------------------------

def cmd_info(args, spec, out):
    out.record("group", n=spec.n, finite_pairs=len(spec.finite_pairs()), **_flags(spec))
    for i, j in spec.pairs():
        out.record("label", i=i, j=j, m=spec.m(i, j))
    return EXIT_OK


def cmd_relator(args, spec, out):
    pair = _pair(spec, args.pair)
    r = build_relator(pair)
    out.record("relator", pair=f"{pair.i},{pair.j}", m=pair.m, word=_tok(r),
               syllables=len(r), letters=r.letter_length)
    return EXIT_OK


def cmd_nf(args, spec, out):
    pair = _pair(spec, args.pair)
    w = _word(args, spec)
    g = garside_nf(w, pair)
    a = amalgam_nf(w, pair)
    agree = int(g.is_trivial == a.is_trivial)
    out.record("nf", pair=f"{pair.i},{pair.j}", word=_tok(w), garside=str(g).replace(" ", ""),
               delta_power=g.inf, factors=len(g.factors), trivial=int(g.is_trivial),
               amalgam_central=a.central, amalgam_length=len(a.reps), oracles_agree=agree)
    return EXIT_OK if agree else EXIT_FAIL


def cmd_wp(args, spec, out):
    w = _word(args, spec)
    res = dehn_solve(w, spec, allow_non_extra_large=args.allow_non_extra_large)
    if args.trace:
        for line in (res.format_trace().splitlines() if out.text else res.records()):
            out.raw(line)
    else:
        out.record("wp", word=_tok(w), result="trivial" if res.trivial else "nontrivial",
                   steps=res.steps, residual=_tok(res.residual))
    return EXIT_OK


def cmd_minsyll(args, spec, out):
    pair = _pair(spec, args.pair)
    w = _word(args, spec)
    res = min_syllable_rep(w, pair, SearchBounds(args.max_syllables, args.max_exponent))
    out.record("minsyll", pair=f"{pair.i},{pair.j}", word=_tok(w), rep=_tok(res.word),
               syllables=len(res.word), input_syllables=len(w), search=res.flag)
    return EXIT_OK


def cmd_reduce(args, spec, out):
    w = _word(args, spec)
    k = 4 if args.strong else 3
    v = find_violation(w, spec, k, allow_non_extra_large=args.allow_non_extra_large)
    if v is None:
        out.record("reduce", word=_tok(w), k=k, reduced=1)
    else:
        out.record("reduce", word=_tok(w), k=k, reduced=0, start=v.start, stop=v.stop,
                   pair=f"{v.pair.i},{v.pair.j}", v=_tok(v.subword), u=_tok(v.completion))
    return EXIT_OK


def cmd_intersect(args, spec, out):
    rep = parabolic_intersection_check(spec, tuple(args.pair), tuple(args.pair2), args.radius)
    out.record("intersect", first=f"{rep.pair1.i},{rep.pair1.j}", second=f"{rep.pair2.i},{rep.pair2.j}",
               radius=rep.radius, size1=rep.size1, size2=rep.size2, comparisons=rep.comparisons,
               common=len(rep.common), failures=len(rep.failures), ok=int(rep.ok))
    for x, y in rep.common:
        out.record("common", left=_tok(x), right=_tok(y))
    return EXIT_OK if rep.ok else EXIT_FAIL


def _ball(args, spec):
    return build_ball(spec, args.radius, args.slack, allow_non_extra_large=args.allow_non_extra_large)


def cmd_ball(args, spec, out):
    ball = _ball(args, spec)
    out.record("ball", radius=ball.radius, slack=ball.slack, group=ball.n_group, cone=ball.n_cone,
               gamma_edges=len(ball.gamma_edges), cone_edges=sum(len(c.members) for c in ball.cones),
               stabilized=int(ball.stabilized), comparisons=ball.comparisons)
    if args.export:
        with open(args.export, "w", encoding="utf-8") as fh:
            for line in ball.export_lines():
                fh.write(line + "\n")
    return EXIT_OK


def _locate(ball, w):
    try:
        return ball.locate(w)
    except OutsideBallError as exc:
        raise UsageError(str(exc)) from None


def cmd_dist(args, spec, out):
    ball = _ball(args, spec)
    target = _word(args, spec)
    source = _word(args, spec, "source")
    u, v = _locate(ball, source), _locate(ball, target)
    out.record("dist", source=_tok(source), target=_tok(target), doubled=ball.distance(u, v),
               gamma=ball.gamma_distance(u, v))
    return EXIT_OK


def cmd_geo(args, spec, out):
    ball = _ball(args, spec)
    target = _word(args, spec)
    source = _word(args, spec, "source")
    u, v = _locate(ball, source), _locate(ball, target)
    gs = all_geodesics(ball, u, v, args.cap_geodesics, np.random.default_rng(args.seed))
    out.record("geodesics", source=_tok(source), target=_tok(target), length=ball.distance(u, v),
               count=gs.count, listed=len(gs.paths), capped=int(gs.capped))
    for k, p in enumerate(gs.paths):
        out.record("path", index=k, nodes=".".join(_node_name(ball, x) for x in p.nodes))
    if len(gs.paths) >= 2:
        worst = max(hausdorff_X(ball, p, q) for p in gs.paths for q in gs.paths)
        out.record("bigon", max_hausdorff=worst)
    return EXIT_OK


def _node_name(ball, x) -> str:
    if ball.is_group(x):
        return f"g{x}"
    cone = ball.cone(x)
    return f"c{x}[{cone.pair.i},{cone.pair.j}]"


def _require_extra_large(spec, args):
    if not spec.is_extra_large and not args.allow_non_extra_large:
        raise NotExtraLargeError("presentation is not of extra-large type; pass --allow-non-extra-large")


def cmd_pipeline(args, spec, out):
    if not spec.is_theorem_scope and not args.allow_non_theorem_scope:
        out.record("pipeline_skipped", reason="theorem-scope-required")
        return EXIT_USAGE
    ball = _ball(args, spec)
    large = build_ball(spec, args.radius + 1, args.slack + 1, allow_non_extra_large=args.allow_non_extra_large)
    paths = sample_pipeline_paths(ball, large, args.samples, args.seed)
    fails = 0
    for p in paths:
        rep = verify_pipeline(ball, p, large, allow_non_theorem_scope=args.allow_non_theorem_scope)
        fails += not rep.ok
        out.raw(rep.record() if not out.text else rep.record().replace(" ", "  "))
    out.record("pipeline_summary", samples=len(paths), failures=fails, ok=int(fails == 0))
    return EXIT_OK if fails == 0 else EXIT_FAIL


def _scan_records(rep, out):
    for line in rep.records():
        out.raw(line)


def cmd_bigons(args, spec, out):
    _require_extra_large(spec, args)
    ball = _ball(args, spec)
    large = build_ball(spec, args.radius + 1, args.slack + 1, allow_non_extra_large=args.allow_non_extra_large)
    rep = bigon_scan(ball, large, args.mode, args.cap_geodesics, args.seed, args.max_quads)
    _scan_records(rep, out)
    ok = rep.max_delta <= BIGON_BOUND
    out.record("bigons_summary", mode=rep.mode, max_delta=rep.max_delta, bound=BIGON_BOUND, ok=int(ok))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_delta(args, specs, out):
    rows = []
    for path, spec in specs:
        _require_extra_large(spec, args)
        ball = _ball(args, spec)
        large = build_ball(spec, args.radius + 1, args.slack + 1, allow_non_extra_large=args.allow_non_extra_large)
        vertex = bigon_scan(ball, large, "vertex", args.cap_geodesics, args.seed)
        claim = bigon_scan(ball, large, "claim", args.cap_geodesics, args.seed, args.max_quads)
        rows.append(DeltaRow(Path(path).stem, vertex, claim))
    summary = delta_report(rows)
    for line in summary.records():
        out.raw(line)
    return EXIT_OK if summary.ok else EXIT_FAIL


def cmd_accept(args, spec, out):
    only = tuple(int(x) for x in args.only.split(",")) if args.only else ()
    bad = [k for k in only if k not in acceptance.CRITERIA]
    if bad:
        raise UsageError(f"unknown criteria {bad}")
    cfg = acceptance.AcceptanceConfig(spec=spec, radius=args.radius, slack=args.slack, seed=args.seed,
                                      cap_geodesics=args.cap_geodesics, max_quadrilaterals=args.max_quads,
                                      only=only)
    results = acceptance.run_acceptance(cfg, emit=lambda r: (out.raw(r.line()), sys.stdout.flush()))
    failed = [r.number for r in results if r.passed is False]
    for r in results:
        if r.passed is None:
            for note in r.notes:
                out.record("notice", criterion=r.number, note=note.replace(" ", "-"))
    out.record("accept_summary", criteria=len(results), failed=len(failed),
               skipped=sum(r.passed is None for r in results), ok=int(not failed))
    return EXIT_OK if not failed else EXIT_FAIL


COMMANDS = {
    "info": cmd_info, "relator": cmd_relator, "nf": cmd_nf, "wp": cmd_wp, "minsyll": cmd_minsyll,
    "reduce": cmd_reduce, "intersect": cmd_intersect, "ball": cmd_ball, "dist": cmd_dist,
    "geo": cmd_geo, "pipeline": cmd_pipeline, "bigons": cmd_bigons, "delta": cmd_delta,
    "accept": cmd_accept,
}


def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--group", action="append", metavar="FILE",
                        help="group file (default: shipped E7 example); repeat for 'delta'")
    common.add_argument("--text", action="store_true", help="human-readable output")
    common.add_argument("--seed", type=_nonneg, default=0)
    common.add_argument("--allow-non-extra-large", action="store_true")

    ball_opts = argparse.ArgumentParser(add_help=False)
    ball_opts.add_argument("--radius", type=_nonneg, default=3)
    ball_opts.add_argument("--slack", type=_nonneg, default=1)
    ball_opts.add_argument("--cap-geodesics", type=_nonneg, default=64)

    pair_opt = argparse.ArgumentParser(add_help=False)
    pair_opt.add_argument("--pair", type=int, nargs=2, metavar=("I", "J"), default=[1, 2])

    parser = argparse.ArgumentParser(prog="artin-relhyp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("info", parents=[common], help="presentation summary")
    sub.add_parser("relator", parents=[common, pair_opt], help="defining relator of G_ij")

    p = sub.add_parser("nf", parents=[common, pair_opt], help="normal forms in G_ij")
    p.add_argument("word")
    p = sub.add_parser("wp", parents=[common], help="word problem via Dehn-style reduction")
    p.add_argument("word")
    p.add_argument("--trace", action="store_true")
    p = sub.add_parser("minsyll", parents=[common, pair_opt], help="syllable-minimal representative")
    p.add_argument("word")
    p.add_argument("--max-syllables", type=_nonneg)
    p.add_argument("--max-exponent", type=_nonneg)
    p = sub.add_parser("reduce", parents=[common], help="Artin-reduced test (first violation)")
    p.add_argument("word")
    p.add_argument("--strong", action="store_true", help="strongly Artin-reduced (k=4)")

    p = sub.add_parser("intersect", parents=[common, pair_opt], help="parabolic intersection spot-check")
    p.add_argument("--pair2", type=int, nargs=2, metavar=("S", "T"), default=[1, 3])
    p.add_argument("--radius", type=_nonneg, default=6)

    p = sub.add_parser("ball", parents=[common, ball_opts], help="build a coned-off ball")
    p.add_argument("--export", metavar="FILE")
    for name, help_ in (("dist", "doubled distance in X"), ("geo", "geodesics in X")):
        p = sub.add_parser(name, parents=[common, ball_opts], help=help_)
        p.add_argument("word")
        p.add_argument("--from", dest="source", default="1")

    p = sub.add_parser("pipeline", parents=[common, ball_opts], help="geodesic to Artin-reduced path checks")
    p.add_argument("--samples", type=_nonneg, default=200)
    p.add_argument("--allow-non-theorem-scope", action="store_true")
    for name, help_ in (("bigons", "thin-bigon scan"), ("delta", "scan several presentations")):
        p = sub.add_parser(name, parents=[common, ball_opts], help=help_)
        p.add_argument("--max-quads", type=_nonneg, default=2000)
        if name == "bigons":
            p.add_argument("--mode", choices=["vertex", "claim"], default="vertex")
    p = sub.add_parser("accept", parents=[common, ball_opts], help="run the acceptance suite")
    p.add_argument("--max-quads", type=_nonneg, default=2000)
    p.add_argument("--only", help="comma-separated criterion numbers")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    out = Out(args.text)
    paths = args.group or [str(default_group_path())]
    try:
        specs = [(p, load_group(p)) for p in paths]
        if args.command == "delta":
            return COMMANDS["delta"](args, specs, out)
        if len(specs) > 1:
            raise UsageError("only 'delta' accepts several --group files")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore" if not args.text else "default")
            return COMMANDS[args.command](args, specs[0][1], out)
    except ResourceCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (GroupFileError, UsageError, NotExtraLargeError, ForeignGeneratorError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
