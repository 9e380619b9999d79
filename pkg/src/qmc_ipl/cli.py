"""Command-line interface.

Subcommands::

    construct   build a rule by CBC and write it as JSON
    points      write the point set of a saved rule
    evaluate    report B_u, C_u and error bounds of a saved rule
    experiment  run b1 | f1 | f2 | f3 and write CSV

Exit status is 0 on success, 2 for bad flags or input files, and 3 when a
size guard refuses the request.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__
from .cbc import cbc_construct, choose_interlacing
from .criterion import WeightProfile, theorem2_bound, wce_bound
from .errors import InvalidRuleError, SizeGuardError
from .experiments import DEFAULT_M, DEFAULT_R, DEFAULT_S, DEFAULT_W, EXPERIMENTS, Grid, rows_to_csv, run_experiment, worker_count
from .gfpoly import is_prime
from .lattice import MAX_EXACT_BITS, format_point_file, generate_point_set
from .quadrature import abs_error, make_integrand
from .rulefile import load_rule, rule_to_json

EXIT_OK, EXIT_USAGE, EXIT_GUARD = 0, 2, 3


class UsageError(Exception):
    pass


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {v}")
    return v


def _prime(text: str) -> int:
    v = _positive_int(text)
    if not is_prime(v):
        raise argparse.ArgumentTypeError(f"b must be prime, got {v}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _interlacing(text: str):
    return "auto" if text == "auto" else _positive_int(text)


def _lambda(text: str) -> float:
    v = _positive_float(text)
    if v > 1:
        raise argparse.ArgumentTypeError(f"lambda must lie in (0, 1], got {v}")
    return v


def _list_of(conv):
    """Comma lists and, for integers, a-b ranges: '1,2,4' or '5-12'."""
    def parse(text: str):
        out = []
        for part in text.split(","):
            part = part.strip()
            if conv is _positive_int and "-" in part[1:]:
                lo, hi = part.split("-", 1)
                lo, hi = conv(lo), conv(hi)
                if hi < lo:
                    raise argparse.ArgumentTypeError(f"empty range {part!r}")
                out.extend(range(lo, hi + 1))
            else:
                out.append(conv(part))
        return tuple(out)
    parse.__name__ = conv.__name__
    return parse


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmc-ipl", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="build a rule by component-by-component search")
    c.add_argument("--b", type=_prime, default=2)
    c.add_argument("--m", type=_positive_int, required=True)
    c.add_argument("--s", type=_positive_int, required=True)
    c.add_argument("--r", type=_positive_float, required=True, help="weight decay u_j = 2^-(j^r)")
    c.add_argument("--d", type=_interlacing, default="auto", help="interlacing factor or 'auto'")
    c.add_argument("--mode", choices=("naive", "fast"), default="fast")
    c.add_argument("--out", help="rule file to write (default: stdout)")
    c.add_argument("--allow-extended", action="store_true",
                   help="permit d*m beyond binary64 precision")

    p = sub.add_parser("points", help="write the point set of a rule file")
    p.add_argument("rule")
    p.add_argument("--out")
    p.add_argument("--allow-extended", action="store_true")

    e = sub.add_parser("evaluate", aliases=["criterion"], help="criterion values of a rule file")
    e.add_argument("rule")
    e.add_argument("--lambda", dest="lam", type=_lambda, help="also report the CBC guarantee for this lambda")
    e.add_argument("--fn", choices=("f1", "f2", "f3"), help="also report this integrand's error")
    e.add_argument("--r", type=_positive_float, help="f1 parameter (default: the rule's r)")
    e.add_argument("--w", type=_positive_float, help="f2 / f3 parameter")
    e.add_argument("--allow-extended", action="store_true")

    x = sub.add_parser("experiment", help="run a convergence experiment and write CSV")
    x.add_argument("name", choices=EXPERIMENTS)
    x.add_argument("--b", type=_prime, default=2)
    x.add_argument("--r", type=_list_of(_positive_float), default=DEFAULT_R)
    x.add_argument("--s", type=_list_of(_positive_int), default=DEFAULT_S)
    x.add_argument("--m", type=_list_of(_positive_int), default=DEFAULT_M)
    x.add_argument("--w", type=_list_of(_positive_float), default=DEFAULT_W)
    x.add_argument("--d", type=_interlacing, default="auto")
    x.add_argument("--mode", choices=("naive", "fast"), default="fast")
    x.add_argument("--out")
    x.add_argument("--allow-extended", action="store_true")
    return parser


def cmd_construct(args) -> int:
    d = choose_interlacing(args.m, args.r) if args.d == "auto" else args.d
    bits = d * args.m * math.log2(args.b)
    if bits > MAX_EXACT_BITS and not args.allow_extended:
        raise SizeGuardError(f"d*m = {d * args.m} digits ({bits:.0f} bits) exceed binary64; "
                             "pass --allow-extended to truncate points")
    result = cbc_construct(args.b, args.m, args.s, d, WeightProfile(args.b, r=args.r), mode=args.mode)
    obj = rule_to_json(result)
    _emit(json.dumps(obj, indent=2) + "\n", args.out)
    summary = f"B_u = {obj['B_u']!r}\nwce_bound = {obj['wce_bound']!r}\n"
    (sys.stdout if args.out else sys.stderr).write(summary)
    return EXIT_OK


def cmd_points(args) -> int:
    rule = load_rule(args.rule)
    pts = generate_point_set(rule.spec)
    _emit(format_point_file(pts, args.allow_extended), args.out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    rule = load_rule(args.rule)
    spec = rule.spec
    crit = wce_bound(spec, B=rule.B_u)
    out = {"b": spec.b, "m": spec.m, "s": spec.s, "d": spec.d, "N": spec.n_points,
           "B_u": crit.B_u, "C_u": crit.C_u, "C_u_minus_1": crit.C_u_minus_1,
           "wce_bound": crit.wce_bound}
    if args.lam is not None:
        out["lambda"] = args.lam
        out["theorem2_bound"] = theorem2_bound(spec.weights, spec.b, spec.m, spec.d, spec.s, args.lam)
    if args.fn:
        r = args.r if args.r is not None else spec.weights.r
        if args.fn == "f1" and r is None:
            raise UsageError("f1 needs --r for rules built from explicit weights")
        if args.fn != "f1" and args.w is None:
            raise UsageError(f"{args.fn} needs --w")
        f = make_integrand(args.fn, spec.s, r=r, w=args.w)
        x = generate_point_set(spec).to_float(allow_extended=args.allow_extended)
        out["fn"] = args.fn
        out["abs_error"] = abs_error(f, x)
    for k, v in out.items():
        if not isinstance(v, (str, int)):
            v = float(v)
        sys.stdout.write(f"{k} = {v!r}\n")
    return EXIT_OK


def cmd_experiment(args) -> int:
    grid = Grid(b=args.b, r=args.r, s=args.s, m=args.m, w=args.w,
                d=None if args.d == "auto" else args.d, mode=args.mode,
                allow_extended=args.allow_extended)
    try:
        rows = run_experiment(args.name, grid, workers=worker_count())
    except ValueError as exc:
        if isinstance(exc, SizeGuardError):
            raise
        raise UsageError(str(exc)) from exc
    _emit(rows_to_csv(rows), args.out)
    return EXIT_OK


COMMANDS = {"construct": cmd_construct, "points": cmd_points, "evaluate": cmd_evaluate,
            "criterion": cmd_evaluate, "experiment": cmd_experiment}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on bad flags
    try:
        worker_count()
        return COMMANDS[args.command](args)
    except SizeGuardError as exc:
        print(f"qmc-ipl: size guard: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (UsageError, InvalidRuleError, OSError) as exc:
        print(f"qmc-ipl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"qmc-ipl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
