"""Command-line front end.

Exit status: 0 on success, 1 when a certification fails or a recomputation
disagrees with stored data, 2 for usage errors and invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import casebook, cft, magnus, rdbound, series
from ._rational import fmt, to_rational
from .errors import BranchError, ConsistencyError, DepthError, DomainError, FixtureError, PreconditionError, ResourceError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _dump(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _read_json(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _InputError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text), text
    except json.JSONDecodeError:
        return None, text


class _InputError(Exception):
    pass


def _load_series(path: str) -> series.GSSeries:
    data, text = _read_json(path)
    try:
        if data is None:
            return series.GSSeries.parse(text.strip())
        if isinstance(data, str):
            return series.GSSeries.parse(data)
        return series.GSSeries.from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise _InputError(f"{path}: not a series: {exc}") from exc


def _rational_arg(text: str) -> Fraction:
    try:
        return to_rational(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


# -- subcommands -----------------------------------------------------------------


def _cmd_certify(args) -> int:
    s = _load_series(args.series)
    verdict = series.find_witness(s, args.max_depth)
    if args.json:
        _dump({"series": str(s), **verdict.to_dict()})
    else:
        print(verdict)
    return EXIT_OK if verdict.certifies_infinite else EXIT_FAIL


def _cmd_cut(args) -> int:
    s = series.cut(_load_series(args.series), args.depth, args.count)
    if args.json:
        _dump(s.to_dict())
    else:
        print(s)
    return EXIT_OK


def _cmd_depth(args) -> int:
    try:
        word = magnus.FreeWord.parse(args.word, args.d)
    except ValueError as exc:
        raise _InputError(str(exc)) from exc
    result = magnus.depth(word, args.p, args.trunc)
    if args.json:
        _dump({"word": str(word), "p": args.p, "truncation": args.trunc, "kind": result.kind, "value": result.value})
    else:
        print(result)
    return EXIT_OK


def _cmd_ranks(args) -> int:
    data, _ = _read_json(args.profile)
    if not isinstance(data, dict):
        raise _InputError(f"{args.profile}: expected a JSON rank profile")
    try:
        rp = casebook.profile_from_dict(data)
    except (KeyError, TypeError, ValueError) as exc:
        raise _InputError(f"{args.profile}: malformed rank profile: {exc}") from exc
    solved = rp.B_S_rank is None
    b_rank = cft.solve_b_rank(rp) if solved else rp.B_S_rank
    full = cft.RankProfile(rp.p, rp.r1, rp.r2, rp.delta_K, rp.S, b_rank, rp.measured_d)
    d = cft.h1_rank(full)
    if rp.wild_places:
        r, rule = cft.wild_relation_count(d, rp.r2), "d - r2 - 1"
    else:
        r, rule = cft.r_upper_bound(full), "tame bound"
    alpha = cft.alpha_test(d, rp.r1, rp.r2, not rp.S, rp.delta_K)
    s = series.GSSeries.quadratic(d, r)
    verdict = series.find_witness(s)
    if args.json:
        _dump(
            {
                "d": d,
                "B_S_rank": b_rank,
                "B_S_rank_solved": solved,
                "relation_bound": r,
                "relation_rule": rule,
                "alpha_test": alpha,
                "series": str(s),
                **verdict.to_dict(),
            }
        )
    else:
        print(f"d = {d}")
        print(f"B_S rank = {b_rank}" + (" (solved from the measured rank)" if solved else ""))
        print(f"relations r <= {r} ({rule})")
        print(f"alpha test: {'passes' if alpha else 'fails'}")
        print(f"series: {s}")
        print(f"verdict: {verdict}")
    return EXIT_OK


def _cmd_rdbound(args) -> int:
    try:
        fx = casebook.load_fixture(args.fixture)
    except FixtureError as exc:
        raise _InputError(str(exc)) from exc
    precision = rdbound.default_precision() if args.precision is None else args.precision
    bound = casebook.rd_bound_for(fx, precision)
    if bound is None:
        print(f"{fx.id}: fixture carries no root-discriminant data", file=sys.stderr)
        return EXIT_FAIL
    expected = fx.expected.get("rd_bound")
    ok = expected is None or bound.upper < Fraction(expected)
    if args.json:
        _dump({"id": fx.id, **bound.to_dict(), "display": bound.upper_decimal(args.digits), "expected": expected, "ok": ok})
    else:
        line = f"{fx.id}: rd < {bound.upper_decimal(args.digits)} (certified)"
        if expected is not None:
            line += f"; stated bound {expected}: {'met' if ok else 'NOT met'}"
        print(line)
    return EXIT_OK if ok else EXIT_FAIL


def _cmd_schedule(args) -> int:
    s = _load_series(args.series)
    depths = series.frobenius_schedule(s, args.t0, args.budget, args.length)
    after = s
    for k in depths:
        after = series.cut(after, k, 1)
    value = after.eval(args.t0)
    if args.json:
        _dump({"t0": fmt(args.t0), "budget": fmt(args.budget), "depths": depths, "value": fmt(value)})
    else:
        print("depths: " + " ".join(str(k) for k in depths))
        print(f"value at t0={fmt(args.t0)} after cuts: {fmt(value)}")
    return EXIT_OK if value < 0 else EXIT_FAIL


def _cmd_records(args) -> int:
    rows = rdbound.records_table(check=False, precision=args.precision)
    improvements = []
    for signature, old, new, stated in rdbound.IMPROVEMENTS:
        pct = rdbound.improvement_pct(Fraction(old), Fraction(new), args.precision)
        ok = abs(pct.upper - Fraction(stated)) <= Fraction(1, 100) and abs(pct.lower - Fraction(stated)) <= Fraction(1, 100)
        improvements.append((signature, old, new, stated, pct, ok))
    grh = rdbound.grh_constants()
    all_ok = all(r.ok for r in rows) and all(i[-1] for i in improvements) and all(g[2] for g in grh.values())
    if args.json:
        _dump(
            {
                "rows": [
                    {
                        "signature": r.signature,
                        "era": r.era,
                        "rd": rdbound.plain_decimal(r.rd),
                        "partial": rdbound.plain_decimal(r.expected_partial),
                        "recomputed": r.partial.to_dict(),
                        "ok": r.ok,
                    }
                    for r in rows
                ],
                "improvements": [
                    {"signature": s, "old": o, "new": n, "stated_pct": st, "pct": p.to_dict(), "ok": ok}
                    for s, o, n, st, p, ok in improvements
                ],
                "grh_constants": {k: {"recomputed": v, "stored": rdbound.plain_decimal(st), "ok": ok} for k, (v, st, ok) in grh.items()},
                "ok": all_ok,
            }
        )
    elif args.csv:
        print(rdbound.records_csv(rows))
    else:
        print(rdbound.format_records(rows))
        print()
        for signature, old, new, stated, pct, ok in improvements:
            print(f"improvement {signature}: {old} -> {new} = {pct.upper_decimal(4)}% (stated {stated}%) {'ok' if ok else 'MISMATCH'}")
        for name, (value, stored, ok) in grh.items():
            print(f"GRH constant ({name}): stored {rdbound.plain_decimal(stored)}, recomputed {value} {'ok' if ok else 'MISMATCH'}")
    return EXIT_OK if all_ok else EXIT_FAIL


def _cmd_replay(args) -> int:
    try:
        summary = casebook.replay_all(args.filter, args.fixtures, args.precision)
    except FixtureError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    print(summary.to_json(args.timing) if args.json else summary.render(args.timing))
    return EXIT_OK if summary.ok else EXIT_FAIL


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gstower", description="Certify infinite pro-p towers and bound their root discriminants.")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, help_text, func):
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.set_defaults(func=func)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        return p

    p = add("certify", "search an exact witness t0 with P(t0) <= 0", _cmd_certify)
    p.add_argument("--series", required=True, metavar="FILE", help="series as JSON or text such as 1-7t+12t^2")
    p.add_argument("--max-depth", type=_positive_int, default=12, metavar="N", help="dyadic grid refinement (default 12)")

    p = add("cut", "add relations of a given depth", _cmd_cut)
    p.add_argument("--series", required=True, metavar="FILE")
    p.add_argument("--depth", type=int, required=True, metavar="K")
    p.add_argument("--count", type=int, default=1, metavar="C")

    p = add("depth", "Zassenhaus depth of a free-group word", _cmd_depth)
    p.add_argument("--word", required=True, help='e.g. "x0 x1 x0^-1 x1^-1" or "[x0,x1]"')
    p.add_argument("--p", type=_positive_int, required=True)
    p.add_argument("--trunc", type=_positive_int, default=magnus.DEFAULT_TRUNCATION, metavar="N")
    p.add_argument("--d", type=_positive_int, default=None, help="number of generators (default: inferred)")

    p = add("ranks", "generator and relation ranks from a rank profile", _cmd_ranks)
    p.add_argument("--profile", required=True, metavar="FILE")

    p = add("rdbound", "certified root-discriminant bound of a fixture", _cmd_rdbound)
    p.add_argument("--fixture", required=True, metavar="FILE")
    p.add_argument("--precision", type=_rational_arg, default=None, metavar="EPS")
    p.add_argument("--digits", type=_positive_int, default=7, help="decimals displayed (default 7)")

    p = add("schedule", "greedy Frobenius cut schedule at t0", _cmd_schedule)
    p.add_argument("--series", required=True, metavar="FILE")
    p.add_argument("--t0", type=_rational_arg, required=True, metavar="P/Q")
    p.add_argument("--budget", type=_rational_arg, default=Fraction(1, 2), metavar="P/Q")
    p.add_argument("--length", type=_positive_int, required=True, metavar="L")

    p = add("records", "recompute the table of record root discriminants", _cmd_records)
    p.add_argument("--csv", action="store_true", help="CSV rows signature,era,rd,partial")
    p.add_argument("--precision", type=_rational_arg, default=None, metavar="EPS")

    p = add("replay", "replay the shipped worked examples", _cmd_replay)
    p.add_argument("--filter", default=None, metavar="GLOB", help="fixture id glob, e.g. 'wild-*'")
    p.add_argument("--fixtures", default=None, metavar="DIR", help="alternative fixture directory")
    p.add_argument("--precision", type=_rational_arg, default=None, metavar="EPS")
    p.add_argument("--timing", action="store_true", help="include wall-clock times (output no longer reproducible)")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (_InputError, DomainError, PreconditionError, DepthError, BranchError) as exc:
        print(f"gstower {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConsistencyError, ResourceError, FixtureError) as exc:
        print(f"gstower {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
