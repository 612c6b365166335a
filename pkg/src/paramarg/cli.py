"""Command line entry point.

    paramarg run builtin:example2 --out reports --formats json,svg
    paramarg run my_family.json --grid 128,64 --tol rank=1e-8
    paramarg run --list-builtins

Exit status: 0 when every check passes, 1 on a theorem-implication failure
or cross-check disagreement, 2 on usage or configuration errors.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .report import FORMATS, EmitError, emit
from .runner import RunError, run_many
from .scenarios import ScenarioError, list_builtins

log = logging.getLogger("paramarg")

EXIT_OK, EXIT_CHECKS, EXIT_USAGE = 0, 1, 2


def _grid(text: str) -> tuple[int, int]:
    try:
        n, m = (int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N,M (two integers), got {text!r}")
    return n, m


def _tol(text: str) -> tuple[str, float]:
    name, sep, value = text.partition("=")
    try:
        if not sep:
            raise ValueError
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")


def _formats(text: str) -> list[str]:
    out = [x.strip() for x in text.split(",") if x.strip()]
    bad = [x for x in out if x not in FORMATS]
    if bad or not out:
        raise argparse.ArgumentTypeError(f"formats must be drawn from {','.join(FORMATS)}")
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="paramarg", description=__doc__.split("\n\n")[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one or more scenarios and write reports")
    r.add_argument("scenarios", nargs="*", metavar="SCENARIO", help="path to a scenario JSON file or builtin:<id>")
    r.add_argument("--out", default="reports", help="output directory (default: reports)")
    r.add_argument("--formats", type=_formats, default=list(FORMATS), help="comma list of json,csv,svg")
    r.add_argument("--grid", type=_grid, help="boundary angles N and samples per circle factor M")
    r.add_argument("--tol", type=_tol, action="append", default=[], metavar="NAME=VALUE",
                   help="override a tolerance; repeatable")
    r.add_argument("--list-builtins", action="store_true", help="list built-in scenario ids and exit")
    r.add_argument("--jobs", type=int, default=1, help="scenarios run concurrently (default 1)")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if args.list_builtins:
        for name in list_builtins():
            print(f"builtin:{name}")
        return EXIT_OK
    if not args.scenarios:
        print("paramarg run: error: at least one scenario is required", file=sys.stderr)
        return EXIT_USAGE
    if args.jobs < 1:
        print("paramarg run: error: --jobs must be positive", file=sys.stderr)
        return EXIT_USAGE
    try:
        reports = run_many(args.scenarios, args.jobs, args.grid, dict(args.tol))
    except ScenarioError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RunError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc.error, ScenarioError) else EXIT_CHECKS
    code = EXIT_OK
    for rep in reports:
        try:
            paths = emit(rep, args.out, args.formats)
        except EmitError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        failed = [c for c in rep.checks if not c["passed"]]
        print(f"{rep.id}: {'pass' if not failed else 'FAIL'} ({len(rep.checks) - len(failed)}/{len(rep.checks)} checks)")
        for c in failed:
            print(f"  failed: {c['name']}: {c['detail']}")
        for path in paths:
            log.info("  wrote %s", path)
        code = max(code, rep.exit_code)
    return code


if __name__ == "__main__":
    sys.exit(main())
