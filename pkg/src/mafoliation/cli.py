"""Command-line entry point.

Exit codes: 0 ok, 1 bad usage or unreadable input, 2 rank mismatch,
3 evaluation error, 4 non-integrable frame, 5 self-test failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import acceptance, config
from .analysis import RANK_MISMATCH, NON_INTEGRABLE, OK, SKIPPED, analyze, analyze_frame, scan, to_json
from .catalog import CATALOG, catalog_get
from .dsl import FrameSpec, PotentialSpec, load_spec, parse_point
from .errors import FoliationError

EXIT_OK, EXIT_USAGE, EXIT_RANK, EXIT_EVAL, EXIT_FRAME, EXIT_SELFTEST = 0, 1, 2, 3, 4, 5


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _status_code(status: str) -> int:
    if status in (OK, SKIPPED):
        return EXIT_OK
    if status == RANK_MISMATCH:
        return EXIT_RANK
    if status == NON_INTEGRABLE:
        return EXIT_FRAME
    return EXIT_EVAL


def _load(source: str):
    """A spec file path, inline JSON, or the name of a catalog entry."""
    if not os.path.exists(source) and source in CATALOG:
        return catalog_get(source).spec
    return load_spec(source)


def _tolerances(args) -> config.Tolerances:
    return config.DEFAULT.replace(rank=args.tol_rank, identity=args.tol_identity)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="mafoliation", description="Monge-Ampere foliation analysis")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def tol_flags(p):
        p.add_argument("--tol-rank", type=float, default=None, help="relative eigenvalue cut for the Levi rank")
        p.add_argument("--tol-identity", type=float, default=None, help="bound for identity residuals")

    a = sub.add_parser("analyze", help="full report for a potential at one point")
    a.add_argument("spec", help="spec file, inline JSON, or catalog entry name")
    a.add_argument("--point", required=True, help='comma-separated complex literals, e.g. "i, 0.5-2i"')
    a.add_argument("--order", type=int, default=config.DEFAULT_ORDER)
    a.add_argument("--codim", type=int, default=None, help="override the declared codimension p")
    a.add_argument("--out", default=None)
    tol_flags(a)

    s = sub.add_parser("scan", help="analyze random points of the spec's sampling box")
    s.add_argument("spec")
    s.add_argument("--samples", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--order", type=int, default=config.DEFAULT_ORDER)
    s.add_argument("--codim", type=int, default=None)
    s.add_argument("--out", default=None)
    tol_flags(s)

    f = sub.add_parser("frame", help="Frobenius residual and twist of a frame field")
    f.add_argument("spec")
    f.add_argument("--point", required=True)
    f.add_argument("--out", default=None)
    tol_flags(f)

    t = sub.add_parser("selftest", help="run the acceptance suite")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--only", default=None, help="comma-separated criterion numbers")

    e = sub.add_parser("export", help="write a catalog entry as a spec file")
    e.add_argument("name", choices=sorted(CATALOG))
    e.add_argument("--out", default=None)
    return ap


def main(argv=None, *, catalog: dict | None = None) -> int:
    """Run the CLI; returns the exit code. ``catalog`` replaces the built-in
    catalog for ``selftest``."""
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    if args.command == "selftest":
        try:
            only = None if args.only is None else {int(x) for x in args.only.split(",")}
        except ValueError:
            print(f"mafoliation: bad --only list {args.only!r}", file=sys.stderr)
            return EXIT_USAGE
        results = acceptance.run_all(args.seed, catalog, only)
        sys.stdout.write(acceptance.render(results, args.seed))
        return EXIT_OK if all(c.passed for c in results) else EXIT_SELFTEST

    if args.command == "export":
        _emit(to_json(catalog_get(args.name, catalog).to_spec_file()), args.out)
        return EXIT_OK

    try:
        spec = _load(args.spec)
        point = parse_point(args.point) if hasattr(args, "point") else None
        tol = _tolerances(args)
    except (OSError, ValueError, FoliationError) as exc:
        print(f"mafoliation: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if point is not None and len(point) != spec.n:
        print(f"mafoliation: point has {len(point)} coordinates, spec has n = {spec.n}", file=sys.stderr)
        return EXIT_USAGE

    if args.command == "analyze":
        if not isinstance(spec, PotentialSpec):
            print("mafoliation: analyze needs a potential spec (use 'frame')", file=sys.stderr)
            return EXIT_USAGE
        doc = analyze(spec, point, args.order, tol, args.codim)
        _emit(to_json(doc), args.out)
        if doc["status"] not in (OK, SKIPPED):
            print(f"mafoliation: {doc['status']}: {doc.get('message', '')}", file=sys.stderr)
        return _status_code(doc["status"])

    if args.command == "frame":
        if not isinstance(spec, FrameSpec):
            print("mafoliation: frame needs a frame spec", file=sys.stderr)
            return EXIT_USAGE
        doc = analyze_frame(spec, point, tol)
        _emit(to_json(doc), args.out)
        if doc["status"] != OK:
            print(f"mafoliation: {doc['status']}", file=sys.stderr)
        return _status_code(doc["status"])

    # scan
    try:
        summary = scan(spec, args.samples, args.seed, args.order, tol, args.codim)
    except (ValueError, FoliationError) as exc:
        print(f"mafoliation: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _emit(to_json(summary.to_dict()), args.out)
    codes = sorted({_status_code(d["status"]) for d in summary.digests} - {EXIT_OK})
    return codes[0] if codes else EXIT_OK


def main_exit():
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
