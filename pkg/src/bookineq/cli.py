"""Command line front end.

Exit codes: 0 success (the property holds), 1 the property fails, 2 usage
error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from .book import BookLayout, extend_over_cosingleton, extend_over_singleton, is_book_extension
from .bookcone import ABCD, assemble_cone, base_restriction, exists_extension, project_base, sample_cone_point, unfold
from .core import polymatroid_from_json, polymatroid_to_json, validate_polymatroid
from .inequalities import (
    check_against,
    export_family,
    family_members,
    format_inequality,
    parse_family,
    parse_ideal,
    plot_csv,
    remove_redundant,
)
from .polyhedra import BudgetExceeded, ProjectionStats
from .proofcheck import certificates_to_json, verify_certificate_file, verify_proof

OK, FAIL, USAGE, BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_poly(path: str):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    try:
        return polymatroid_from_json(text)
    except (ValueError, KeyError) as e:
        raise UsageError(f"{path}: {e}") from None


def _pages(n: int, lo: int = 2) -> int:
    if n < lo:
        raise UsageError(f"--pages must be at least {lo}")
    return n


def cmd_check(args, out, err) -> int:
    g = _read_poly(args.file)
    rep = validate_polymatroid(g)
    if rep.ok:
        print(f"ok: polymatroid on {''.join(g.ground.labels) if all(len(x) == 1 for x in g.ground.labels) else ' '.join(g.ground.labels)}", file=out)
        return OK
    for v in rep.violations:
        print(f"violated: {v}", file=out)
    return FAIL


def cmd_ineq_gen(args, out, err) -> int:
    n = _pages(args.pages)
    members = family_members(n, args.swaps)
    exprs = [m.expr for m in members]
    if args.minimal:
        keep = set(remove_redundant(exprs))
        members = [m for m in members if m.expr in keep]
    for m in members:
        if args.names:
            print(f"# {m.name}", file=out)
        print(format_inequality(m.expr), file=out)
    return OK


def cmd_ineq_eval(args, out, err) -> int:
    try:
        family = parse_family(Path(args.family).read_text(), ABCD)
    except OSError as e:
        raise UsageError(f"cannot read {args.family}: {e.strerror}") from None
    except ValueError as e:
        raise UsageError(f"{args.family}: {e}") from None
    g = _read_poly(args.poly)
    if g.ground != ABCD:
        raise UsageError("book inequalities are stated on the ground set abcd")
    for e in family:
        v = e(g)
        print(f"{_q(v)}\t{format_inequality(e)}", file=out)
    bad = check_against(g, family)
    if bad:
        print(f"{len(bad)} of {len(family)} inequalities violated", file=err)
        return FAIL
    return OK


def _q(v) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def cmd_extend(args, out, err) -> int:
    g = _read_poly(args.poly)
    n = _pages(args.pages)
    spine = [x for x in args.spine.split(",")] if "," in args.spine else list(args.spine)
    for x in spine:
        if x not in g.ground:
            raise UsageError(f"spine element {x!r} not in the ground set")
    labels = g.ground.labels
    if len(spine) == 1:
        h, layout = extend_over_singleton(g, spine[0], n)
    elif len(spine) == len(labels) - 1:
        (a,) = [x for x in labels if x not in spine]
        h, layout = extend_over_cosingleton(g, a, n)
    elif g.ground == ABCD and sorted(spine) == ["a", "b"]:
        res = exists_extension(g, n)
        if not res.exists:
            print(f"no {n}-page extension over ab; separating inequality:", file=err)
            print(format_inequality(res.separating), file=err)
            return FAIL
        h = unfold(res.point, n)
        layout = BookLayout(ABCD, ["a", "b"], n)
    else:
        raise UsageError("supported spines: one element, all but one element, or ab on abcd")
    if args.verify:
        rep = is_book_extension(h, g, layout)
        if not rep.ok:
            print(f"internal error: construction failed verification: {rep}", file=err)
            return FAIL
    print(polymatroid_to_json(h), file=out)
    return OK


def cmd_feasible(args, out, err) -> int:
    g = _read_poly(args.poly)
    n = _pages(args.pages)
    if g.ground != ABCD:
        raise UsageError("feasibility is decided for polymatroids on abcd with spine ab")
    if not validate_polymatroid(g).ok:
        print("input is not a polymatroid", file=err)
        return FAIL
    res = exists_extension(g, n)
    if res.exists:
        print(f"feasible: a {n}-page extension over ab exists", file=out)
        return OK
    print(f"infeasible: no {n}-page extension over ab", file=out)
    print(f"separating inequality: {format_inequality(res.separating)}  (value {_q(res.separating(g))})", file=out)
    names = assemble_cone(n).row_names
    labs = [ABCD.label(m) for m in ABCD.nonempty_subsets()]
    print("certificate:", file=out)
    for (kind, i), y in res.certificate.multipliers:
        what = names[i] if kind == "cone" else f"pin {labs[i]}"
        print(f"  {_q(y)}\t{what}", file=out)
    return FAIL


def cmd_project(args, out, err) -> int:
    n = _pages(args.pages)
    stats = ProjectionStats()
    try:
        facets = project_base(n, budget_seconds=args.budget, budget_rows=args.budget_rows, jobs=args.jobs, stats=stats)
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=err)
        if e.partial is not None:
            print(f"partial cone: {len(e.partial.coordinates)} coordinates, {len(e.partial.constraints)} rows", file=err)
        return BUDGET
    lines = sorted(format_inequality(f) for f in facets)
    for line in lines:
        print(line, file=out)
    print(f"{len(lines)} facets", file=err)
    return OK


def cmd_verify_proof(args, out, err) -> int:
    n = _pages(args.pages)
    ideal = None
    if args.ideal:
        try:
            ideal = parse_ideal(args.ideal, n)
        except ValueError as e:
            raise UsageError(str(e)) from None
    run = verify_proof(n, ideal=ideal, lp=args.lp)
    for r in run.ledgers_A + run.ledgers_B:
        print(r.summary(), file=out)
        if args.audit:
            for line in r.audit():
                print("    " + line, file=out)
    for t in run.telescopes:
        status = "ok" if t.ok else f"FAILED ({t.message})"
        print(f"telescope {t.name}: {status}", file=out)
    for m in run.members:
        print(f"certificate {m.name}: {'ok' if m.verify() else 'FAILED'} ({len(m.cert.mult)} rows)", file=out)
    if args.cert_out:
        Path(args.cert_out).write_text(certificates_to_json(n, run.members) + "\n")
    print(f"n={n}: {'all checks passed' if run.ok else 'FAILED'}", file=out)
    return OK if run.ok else FAIL


def cmd_verify_cert(args, out, err) -> int:
    try:
        text = Path(args.file).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {args.file}: {e.strerror}") from None
    try:
        results = verify_certificate_file(text)
    except (ValueError, KeyError, TypeError) as e:
        raise UsageError(f"{args.file}: malformed certificate file ({e})") from None
    for r in results:
        print(f"{r.name}: {'ok' if r.ok else 'FAILED: ' + r.message}", file=out)
    return OK if all(r.ok for r in results) else FAIL


def cmd_plot_data(args, out, err) -> int:
    n = _pages(args.pages)
    out.write(plot_csv(n))
    return OK


def cmd_sample(args, out, err) -> int:
    n = _pages(args.pages)
    h = sample_cone_point(n, args.seed)
    g = h if args.extension else base_restriction(h, n)
    print(polymatroid_to_json(g), file=out)
    return OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bookineq", description="Book extensions and book inequalities of polymatroids.")
    p.add_argument("--jobs", type=int, default=1, help="parallel LP subproblems (accepted; runs are sequential)")
    p.add_argument("-v", "--verbose", action="store_true", help="progress logging on stderr")
    sub = p.add_subparsers(dest="cmd", parser_class=_Parser)

    s = sub.add_parser("check", help="validate a polymatroid JSON file")
    s.add_argument("file")
    s.set_defaults(fn=cmd_check)

    ineq = sub.add_parser("ineq", help="book inequalities")
    isub = ineq.add_subparsers(dest="ineq_cmd", parser_class=_Parser)
    s = isub.add_parser("gen", help="print the family B_n")
    s.add_argument("--pages", type=int, required=True)
    s.add_argument("--swaps", action="store_true", help="close under a<->b and c<->d")
    s.add_argument("--minimal", action="store_true", help="drop members implied by Shannon and the others")
    s.add_argument("--names", action="store_true", help="precede each inequality by a name comment")
    s.set_defaults(fn=cmd_ineq_gen)
    s = isub.add_parser("eval", help="evaluate a family file on a polymatroid")
    s.add_argument("--family", required=True)
    s.add_argument("--poly", required=True)
    s.set_defaults(fn=cmd_ineq_eval)

    s = sub.add_parser("extend", help="construct a book extension")
    s.add_argument("--spine", required=True, help="spine elements, e.g. a or abc or x,y")
    s.add_argument("--pages", type=int, required=True)
    s.add_argument("--poly", required=True)
    s.add_argument("--no-verify", dest="verify", action="store_false")
    s.set_defaults(fn=cmd_extend)

    s = sub.add_parser("feasible", help="decide whether an n-page extension over ab exists")
    s.add_argument("--pages", type=int, required=True)
    s.add_argument("--poly", required=True)
    s.set_defaults(fn=cmd_feasible)

    s = sub.add_parser("project", help="facets of the projected n-page cone")
    s.add_argument("--pages", type=int, required=True)
    s.add_argument("--budget", type=float, default=None, help="time budget in seconds")
    s.add_argument("--budget-rows", type=int, default=None, help="cap on intermediate rows")
    s.set_defaults(fn=cmd_project)

    s = sub.add_parser("verify-proof", help="machine-check the necessity proof for n pages")
    s.add_argument("--pages", type=int, required=True)
    s.add_argument("--ideal", default=None, help='point list "0,0;1,0" or u, v, t')
    s.add_argument("--cert-out", default=None, help="write certificates as JSON")
    s.add_argument("--lp", action="store_true", help="cross-check ledger rows by LP (slow)")
    s.add_argument("--audit", action="store_true", help="list the elemental instance behind every row")
    s.set_defaults(fn=cmd_verify_proof)

    s = sub.add_parser("verify-cert", help="re-multiply a certificate file")
    s.add_argument("file")
    s.set_defaults(fn=cmd_verify_cert)

    s = sub.add_parser("plot-data", help="CSV of the normalised coefficient points")
    s.add_argument("--pages", type=int, required=True)
    s.set_defaults(fn=cmd_plot_data)

    s = sub.add_parser("sample", help="seeded random point of the n-page cone")
    s.add_argument("--pages", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--extension", action="store_true", help="print the whole extension, not its base")
    s.set_defaults(fn=cmd_sample)
    return p


def run(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "fn"):
            raise UsageError("missing subcommand")
        if args.jobs < 1:
            raise UsageError("--jobs must be positive")
        if args.verbose:
            logging.basicConfig(level=logging.INFO, stream=err, format="%(message)s")
        return args.fn(args, out, err)
    except UsageError as e:
        print(f"usage error: {e}", file=err)
        print(parser.format_usage().rstrip(), file=err)
        return USAGE


def main() -> None:
    try:
        code = run()
        sys.stdout.flush()
    except BrokenPipeError:
        # output cut short by the reader (e.g. piped into head)
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = FAIL
    sys.exit(code)
