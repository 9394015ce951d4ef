"""``hplp`` command line: check programs, run queries, dump ASTs.

Exit codes:

  0   success (``check``: well_defined)
  1   ill_defined program, or a query refused by validation
  2   unverified program (``check``, or ``query`` without --force)
  3   inference failed (floundering, depth, countability, ...)
  64  usage error
  65  syntax error in the program or query
  66  program file not found
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from fractions import Fraction
from typing import Optional

from hplp.analysis import DEFAULT_UNFOLD_DEPTH, Report, check_query, validate
from hplp.distributions import DistributionError
from hplp.explanations import exact_query
from hplp.frontend import HplSyntaxError, parse_program, parse_query
from hplp.frontend.astjson import program_to_dict
from hplp.resolution import ResolutionError
from hplp.sampler import estimate

EXIT_OK, EXIT_ILL, EXIT_UNVERIFIED, EXIT_INFERENCE = 0, 1, 2, 3
EXIT_USAGE, EXIT_DATAERR, EXIT_NOINPUT = 64, 65, 66

VERDICT_EXIT = {"well_defined": EXIT_OK, "ill_defined": EXIT_ILL,
                "unverified": EXIT_UNVERIFIED}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text}")
    return v


def _epsilon(text: str) -> Fraction:
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None
    if v <= 0:
        raise argparse.ArgumentTypeError("epsilon must be positive")
    return v


def _default_seed() -> int:
    raw = os.environ.get("HPLP_SEED")
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"HPLP_SEED is not an integer: {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hplp", description="Hybrid probabilistic logic programs.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fmt = _Parser(add_help=False)
    fmt.add_argument("--format", choices=("json", "text"), default="text")

    check = sub.add_parser("check", parents=[fmt], help="validate a program")
    check.add_argument("program")
    check.add_argument("--query", help="also check that this query is ground-instantiable")
    check.add_argument("--unfold-depth", type=int, default=DEFAULT_UNFOLD_DEPTH)

    query = sub.add_parser("query", parents=[fmt], help="compute a query probability")
    query.add_argument("program")
    query.add_argument("query")
    mode = query.add_mutually_exclusive_group(required=True)
    mode.add_argument("--exact", dest="mode", action="store_const", const="exact")
    mode.add_argument("--mc", dest="mode", action="store_const", const="mc")
    query.add_argument("--samples", type=_positive_int, default=10_000)
    query.add_argument("--seed", type=int, default=None)
    query.add_argument("--epsilon", type=_epsilon, default=Fraction(1, 10**6))
    query.add_argument("--max-depth", type=_positive_int, default=None)
    query.add_argument("--workers", type=_positive_int, default=1)
    query.add_argument("--force", action="store_true",
                       help="run even if validation fails (never for CONT_INDEX)")

    ast = sub.add_parser("ast", help="print the parsed program as JSON")
    ast.add_argument("program")
    return parser


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(data: dict, fmt: str, out) -> None:
    if fmt == "json":
        out.write(json.dumps(data, indent=2, sort_keys=True) + "\n")
        return
    for k, v in data.items():
        if isinstance(v, list):
            out.write(f"{k}:\n")
            for item in v:
                out.write(f"  {item}\n")
        else:
            out.write(f"{k}: {v}\n")


def _report_text(report: Report) -> dict:
    return {"verdict": report.verdict,
            "diagnostics": [str(d) for d in report.diagnostics]}


def _cmd_check(args, out, err) -> int:
    program = parse_program(_read(args.program))
    diags = list(validate(program, args.unfold_depth).diagnostics)
    if args.query:
        diags += check_query(program, parse_query(args.query))
    report = Report.of(diags)
    _emit(report.to_dict() if args.format == "json" else _report_text(report),
          args.format, out)
    return VERDICT_EXIT[report.verdict]


def _cmd_query(args, out, err) -> int:
    program = parse_program(_read(args.program))
    query = parse_query(args.query)
    report = Report.of(list(validate(program).diagnostics)
                       + check_query(program, query))
    for d in report.diagnostics:
        err.write(f"{args.program}:{d}\n")
    if report.verdict != "well_defined":
        if any(d.rule == "CONT_INDEX" and d.severity == "error"
               for d in report.diagnostics):
            err.write("hplp: refusing to run: a random variable is indexed by a "
                      "continuous value (--force does not apply)\n")
            return EXIT_ILL
        if not args.force:
            err.write(f"hplp: program is {report.verdict}; use --force to run anyway\n")
            return VERDICT_EXIT[report.verdict]
    if args.mode == "exact":
        max_depth = args.max_depth or 10_000
        schedule = []
        d = 16
        while d < max_depth:
            schedule.append(d)
            d *= 2
        schedule.append(max_depth)
        bound = exact_query(program, query, args.epsilon, max_iterations=len(schedule),
                            depth_schedule=schedule, check=False)
        _emit(bound.to_dict(), args.format, out)
    else:
        seed = args.seed if args.seed is not None else _default_seed()
        est = estimate(program, query, args.samples, seed=seed,
                       depth_bound=args.max_depth or 100_000, workers=args.workers)
        _emit(est.to_dict(), args.format, out)
    return EXIT_OK


def _cmd_ast(args, out, err) -> int:
    program = parse_program(_read(args.program))
    out.write(json.dumps(program_to_dict(program), indent=2) + "\n")
    return EXIT_OK


def run(argv: Optional[list] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        handler = {"check": _cmd_check, "query": _cmd_query, "ast": _cmd_ast}
        return handler[args.command](args, out, err)
    except UsageError as e:
        err.write(f"hplp: {e}\n")
        return EXIT_USAGE
    except FileNotFoundError as e:
        err.write(f"hplp: {e.filename}: no such file\n")
        return EXIT_NOINPUT
    except HplSyntaxError as e:
        err.write(f"hplp: syntax error at {e}\n")
        return EXIT_DATAERR
    except (ResolutionError, DistributionError, ZeroDivisionError) as e:
        err.write(f"hplp: {type(e).__name__}: {e}\n")
        return EXIT_INFERENCE


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="hplp: %(message)s")
    sys.exit(run())


if __name__ == "__main__":
    main()
