"""Command-line front end: ``softef1 solve|verify|oracle|gen|bench``.

Exit codes: 0 success, 1 usage error, 2 parse/validation error, 3 internal
invariant breach.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction

from . import bench
from .core import AllocationError, InstanceError, report
from .envy import EnvyCycleError
from .generators import FAMILIES, generate
from .grid import GridError
from .instance_io import ParseError, parse_allocation, parse_instance, render_allocation, render_instance, report_lines
from .oracle import OracleLimitError, min_violations_ef1
from .solve import ALGOS, IncompatibleAlgorithm, additive_term, solve

log = logging.getLogger("softef1")

EXIT_USAGE, EXIT_INPUT, EXIT_INTERNAL = 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _report_csv(rep, extra=None) -> str:
    fields = dict(line[2:].split("=", 1) for line in report_lines(rep)[1:])
    fields.update(extra or {})
    lines = [",".join(fields), ",".join(f'"{v}"' if "," in v else v for v in fields.values())]
    return "\n".join(lines) + "\n"


def cmd_solve(args) -> int:
    instance = parse_instance(_read(args.instance))
    delta = None if args.delta is None else Fraction(args.delta)
    if delta is not None and args.algo != "degree":
        raise UsageError("--delta only applies to algo 'degree'")
    algo, allocation = solve(instance, args.algo, delta)
    rep = report(instance, allocation)
    extra = {"algo": algo, "additive_term": f"{additive_term(instance, algo, delta):.6f}"}
    if args.format == "csv":
        _emit(_report_csv(rep, extra), args.out)
    else:
        _emit(render_allocation(allocation, rep, extra), args.out)
    return 0


def cmd_verify(args) -> int:
    instance = parse_instance(_read(args.instance))
    allocation = parse_allocation(_read(args.allocation), instance)
    rep = report(instance, allocation)
    if args.format == "csv":
        _emit(_report_csv(rep), args.out)
    else:
        _emit("\n".join(report_lines(rep)) + "\n", args.out)
    return 0


def cmd_oracle(args) -> int:
    instance = parse_instance(_read(args.instance))
    count, witness = min_violations_ef1(instance)
    text = render_allocation(witness, report(instance, witness), {"oracle_min_violations": str(Fraction(count))})
    if args.format == "csv":
        text = f"min_violations,baseline\n{Fraction(count)},{report(instance, witness).baseline}\n"
    _emit(text, args.out)
    return 0


def _gen_params(args) -> dict:
    params: dict = {"n": args.n}
    if args.family == "star":
        return params
    if args.family == "cliques":
        if not args.sizes:
            raise UsageError("family 'cliques' needs --sizes, e.g. --sizes 3,3,4")
        params["sizes"] = [int(x) for x in args.sizes.split(",")]
        if args.seed is not None:
            params["seed"] = args.seed
            params["identical"] = args.identical
        return params
    if args.seed is None:
        raise UsageError(f"family {args.family!r} is randomised and needs --seed")
    if args.m is None:
        raise UsageError(f"family {args.family!r} needs --m")
    params.update(m=args.m, seed=args.seed, identical=args.identical)
    if args.family == "gnp":
        if args.p is None:
            raise UsageError("family 'gnp' needs --p")
        params["p"] = args.p
    else:
        if args.degree is None:
            raise UsageError("family 'regular-weighted' needs --degree")
        params["degree"] = args.degree
    return params


def cmd_gen(args) -> int:
    _emit(render_instance(generate(args.family, **_gen_params(args))), args.out)
    return 0


def cmd_bench(args) -> int:
    if args.suite:
        suite = json.loads(_read(args.suite))
    else:
        if args.family is None:
            raise UsageError("bench needs --suite or --family")
        params = _gen_params(args)
        params.pop("seed", None)
        entry = {"family": args.family, "params": params, "algos": args.algo or ["auto"]}
        if args.family != "star":
            entry.update(count=args.count, seed=args.seed or 0)
        if args.delta is not None:
            entry["delta"] = args.delta
        suite = {"entries": [entry]}
    rows = bench.run_suite(bench.expand_suite(suite), jobs=args.jobs)
    if args.format == "csv":
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                bench.write_csv(rows, fh)
        else:
            bench.write_csv(rows, sys.stdout)
    else:
        width = max(len(r["instance"]) for r in rows) if rows else 8
        lines = [f"{r['instance']:<{width}}  {r['algo']:<9}  viol={r['violations']:<8} "
                 f"baseline={r['baseline']:<8} ef1={r['ef1']} balanced={r['balanced']}" for r in rows]
        _emit("\n".join(lines) + "\n", args.out)
    bad = [r["instance"] for r in rows if r["ef1"] != "true" or not bench.row_within_budget(r)]
    if bad:
        log.error("%d rows break EF1 or the violation budget: %s", len(bad), ", ".join(bad[:5]))
        return EXIT_INTERNAL
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="softef1", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--format", choices=("text", "csv"), default="text")
        p.add_argument("--out", metavar="PATH")

    p = sub.add_parser("solve", help="compute an EF1 allocation")
    p.add_argument("instance", help="instance file, or - for stdin")
    p.add_argument("--algo", choices=ALGOS, default="auto")
    p.add_argument("--delta", help="profile bound for algo 'degree' (default: max incident weight)")
    common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="report on an existing allocation")
    p.add_argument("instance")
    p.add_argument("allocation")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="exhaustive minimum over EF1 allocations")
    p.add_argument("instance")
    common(p)
    p.set_defaults(func=cmd_oracle)

    def family_flags(p):
        p.add_argument("--n", type=int, default=3)
        p.add_argument("--m", type=int)
        p.add_argument("--p", type=float)
        p.add_argument("--degree", type=int)
        p.add_argument("--sizes")
        p.add_argument("--seed", type=int)
        p.add_argument("--identical", action="store_true")

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("family", choices=FAMILIES)
    family_flags(p)
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="run a benchmark suite and write CSV")
    p.add_argument("--suite", help="JSON suite file")
    p.add_argument("--family", choices=FAMILIES)
    family_flags(p)
    p.add_argument("--count", type=int, default=100)
    p.add_argument("--algo", action="append", choices=ALGOS)
    p.add_argument("--delta")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("text", "csv"), default="csv")
    p.add_argument("--out", metavar="PATH")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, IncompatibleAlgorithm, OracleLimitError) as exc:
        print(f"softef1: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, InstanceError, AllocationError, OSError) as exc:
        print(f"softef1: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GridError, EnvyCycleError, AssertionError) as exc:
        print(f"softef1: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
