"""Command-line front end.

Exit codes: 0 pass, 1 a check failed, 2 usage or input error,
3 minimum degree too low, 4 a K4 received negative weight.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__, _accel
from .certify import build_sign_chain
from .gadget import DegreeTooLow, NegativeWeight, fractional_k4_decomposition, format_k4_weights
from .generators import complete, complete_minus_matching, random_min_degree
from .graph import EdgeListError, GraphError, format_edge_list, min_degree, read_edge_list
from .nlp import CHECKS, format_point, run_check, w13
from .optimize import SEARCHABLE, SearchConfig, chain_is_monotone, corroborate_chain, optimize

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_DEGREE, EXIT_NEGATIVE = 0, 1, 2, 3, 4
EXACT_LIMIT = 16  # verify-graph runs exactly by default up to this many vertices

_RATIONAL = re.compile(r"^\s*-?\d+\s*(/\s*\d+\s*)?$")


def rational(text: str) -> Fraction:
    """Integers or ``num/den`` only; decimals are rejected to avoid silent rounding."""
    if not _RATIONAL.match(text):
        raise argparse.ArgumentTypeError(f"expected an integer or num/den, got {text!r}")
    try:
        return Fraction(text.replace(" ", ""))
    except ZeroDivisionError:
        raise argparse.ArgumentTypeError(f"zero denominator in {text!r}") from None


def q(v: Fraction) -> str:
    v = Fraction(v)
    return f"{v.numerator}/{v.denominator}"


class Report:
    def __init__(self, mode: str, inputs: dict, seed: int | None = None):
        self.mode, self.inputs, self.seed = mode, inputs, seed
        self.checks: list[dict] = []
        self.extra: dict = {}
        self.start = time.perf_counter()

    def add(self, name: str, claim: str, passed: bool | None, exact_values: dict | None = None,
            witness=None, **floats) -> None:
        entry = {"name": name, "claim": claim,
                 "outcome": "pass" if passed else "fail" if passed is not None else "info",
                 "exact_values": exact_values or {}}
        if witness is not None:
            entry["witness"] = witness
        if floats:
            entry["float_values"] = floats
        self.checks.append(entry)

    def finish(self, exit_code: int) -> dict:
        return {
            "schema": 1,
            "mode": self.mode,
            "inputs": self.inputs,
            "seed": self.seed,
            "checks": self.checks,
            **self.extra,
            "summary": {"verdict": "PASS" if exit_code == 0 else "FAIL", "exit_code": exit_code},
            "timing": {"seconds": round(time.perf_counter() - self.start, 3)},
            "version": __version__,
        }


def _emit(report: Report, code: int, path: str | None) -> int:
    if path:
        Path(path).write_text(json.dumps(report.finish(code), indent=2, sort_keys=True) + "\n")
    return code


# ------------------------------------------------------------------ verify

def cmd_verify_graph(args) -> int:
    try:
        g = read_edge_list(args.path)
    except (OSError, EdgeListError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    mode = args.mode or ("exact" if g.n <= EXACT_LIMIT else "float")
    rep = Report("graph-verify", {"path": str(args.path), "n": g.n, "edges": g.num_edges,
                                  "mode": mode, "exact_checks": args.exact_checks}, args.seed)
    delta = min_degree(g)
    print(f"n={g.n} edges={g.num_edges} min_degree={delta} mode={mode}")
    try:
        result = fractional_k4_decomposition(g, "exact" if mode == "exact" else "float",
                                             exact_checks=args.exact_checks, seed=args.seed)
    except NegativeWeight as exc:
        print(f"negative weight: K4 {exc.k4} has weight {exc.value}")
        rep.add("nonnegative weights", "every K4 weight is nonnegative", False,
                {"weight": q(exc.value)} if isinstance(exc.value, Fraction) else {},
                witness={"k4": list(exc.k4)})
        print("verdict: FAIL")
        return _emit(rep, EXIT_NEGATIVE, args.report)
    except DegreeTooLow as exc:
        print(f"degree too low: min degree {exc.delta} is not above 4n/5 = {Fraction(4 * exc.n, 5)}")
        rep.add("degree precondition", "minimum degree exceeds 4n/5", False,
                {"min_degree": str(exc.delta), "four_fifths_n": q(Fraction(4 * exc.n, 5))})
        print("verdict: FAIL")
        return _emit(rep, EXIT_DEGREE, args.report)
    exact = result.exact
    fmt = (lambda v: q(v)) if exact else (lambda v: repr(float(v)))
    print(f"k4_count={len(result.weights)} min_weight={fmt(result.min_weight)} "
          f"at {result.argmin} max_edge_sum_deviation={fmt(result.max_edge_deviation)}")
    rep.add("degree precondition", "minimum degree exceeds 4n/5", True,
            {"min_degree": str(delta), "four_fifths_n": q(Fraction(4 * g.n, 5))})
    if exact:
        rep.add("edge sums", "weights through every edge sum to exactly one",
                result.max_edge_deviation == 0, {"max_deviation": q(result.max_edge_deviation)})
        rep.add("nonnegative weights", "every K4 weight is nonnegative", result.min_weight >= 0,
                {"min_weight": q(result.min_weight)}, witness={"argmin": list(result.argmin or ())})
    else:
        rep.add("edge sums", "weights through every edge sum to one within 1e-9",
                result.max_edge_deviation <= 1e-9, max_deviation=float(result.max_edge_deviation))
        rep.add("nonnegative weights", "every K4 weight is at least -1e-9", result.min_weight >= -1e-9,
                min_weight=float(result.min_weight))
        rep.add("exact re-verification", "sampled K4 weights are nonnegative in exact arithmetic",
                all(v >= 0 for v in result.exact_checks.values()),
                {" ".join(map(str, t)): q(v) for t, v in sorted(result.exact_checks.items())})
        rep.extra["backend"] = _accel.backend()
        print(f"exact re-verification of {len(result.exact_checks)} K4s: "
              f"min {q(min(result.exact_checks.values()))}" if result.exact_checks else "")
    if args.weights:
        Path(args.weights).write_text(format_k4_weights(result))
    code = EXIT_OK if result.valid else EXIT_FAIL
    print(f"verdict: {'PASS' if code == 0 else 'FAIL'}")
    return _emit(rep, code, args.report)


# --------------------------------------------------------------------- gen

def cmd_gen(args) -> int:
    try:
        if args.kind == "complete":
            g = complete(args.n)
        elif args.kind == "complete-minus-matching":
            g = complete_minus_matching(args.n)
        else:
            if args.delta is None:
                raise GraphError("random-min-degree needs --delta")
            g = random_min_degree(args.n, args.delta, args.seed, args.p)
    except GraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    comment = f"{args.kind} n={args.n}" + (f" delta={args.delta} seed={args.seed}"
                                            if args.kind == "random-min-degree" else "")
    text = format_edge_list(g, comment)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}: n={g.n} edges={g.num_edges} min_degree={min_degree(g)}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# ------------------------------------------------------------- chain check

_CLAIMS = {
    "P3<=P4": "ramp relaxation never lowers the objective",
    "P6<=P7": "eliminating q by its lower bound never lowers the objective",
    "P6<=P7 (q=e+f-y)": "same comparison with q at its lower end",
    "P6<=P7 (q=e)": "same comparison with q at its upper end",
    "P7<=P8": "replacing g0 by its extremes never lowers the objective",
    "P11<=P12": "eliminating b never lowers the objective",
    "P12<=W13": "closed form dominates the one-variable program",
    "pin P4->P5": "pinning r, r0, h, p does not lower the objective",
    "pin P5->P6": "pinning p0, q0 does not lower the objective",
    "pin P8->P9": "pinning e = x + y - 1 does not lower the objective",
    "pin P9->P10": "pinning y = 1 - d does not lower the objective",
    "pin P10->P11": "pinning x = 1 - d does not lower the objective",
    "symmetrize P1": "copying the best z-block does not lower the objective",
    "symmetrize P2": "copying the best y-block does not lower the objective",
    "collapse P1->P3": "symmetric structured points collapse without changing the value",
}


def cmd_chain_check(args) -> int:
    d = args.d
    rep = Report("chain-check", {"d": q(d), "samples": args.samples, "threads": args.threads}, args.seed)
    if not 0 <= d < Fraction(1, 5):
        print("error: d must lie in [0, 1/5)", file=sys.stderr)
        return EXIT_USAGE
    failed = False
    for name in args.only or CHECKS:
        res = run_check(name, d, args.samples, args.seed, args.threads)
        witness = None
        if res.witnesses:
            w = res.witnesses[0]
            witness = {**w.to_dict(), "point_text": format_point(_program_of(name), w.point, d)
                       if not name.startswith(("symmetrize", "collapse")) else None}
        rep.add(name, _CLAIMS.get(name, name), res.passed, {"samples": str(res.samples),
                                                            "witnesses": str(len(res.witnesses))}, witness)
        failed |= not res.passed
        print(f"{'PASS' if res.passed else 'FAIL'}  {name}  ({res.samples} points, "
              f"{len(res.witnesses)} witnesses)")
    return _emit(rep, EXIT_FAIL if failed else EXIT_OK, args.report)


def _program_of(check: str) -> str:
    return CHECKS[check][1].name


# ----------------------------------------------------------------- certify

def cmd_certify(args) -> int:
    rep = Report("certify", {"lo": q(args.lo), "hi": q(args.hi)})
    try:
        cert = build_sign_chain(args.lo, args.hi)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    for rec in cert.records:
        print(f"order {rec.order}: {rec.direction:<10} {rec.endpoint}={q(rec.value)}  {rec.sign}")
        rep.add(f"derivative order {rec.order}", "sign entailed by monotonicity and endpoint value",
                rec.sign != "undetermined" and (rec.order != 0 or rec.sign == "negative"),
                rec.to_dict())
    for disc in cert.discrepancies:
        print(f"note: {disc['item']}: reference {disc['reference']} vs exact {disc['exact']}")
    rep.extra["certificate"] = cert.to_dict()
    rep.extra["recheck"] = cert.recheck()
    if cert.verdict:
        print(f"verdict: PASS  W(d) < 0 on [{args.lo}, {args.hi}]")
        return _emit(rep, EXIT_OK, args.report)
    print(f"verdict: FAIL  chain breaks at derivative order {cert.failed_step}")
    return _emit(rep, EXIT_FAIL, args.report)


# ---------------------------------------------------------------- optimize

def cmd_optimize(args) -> int:
    d = args.d
    rep = Report("optimize", {"program": args.program, "d": q(d), "grid": args.grid,
                              "threads": args.threads})
    if not 0 <= d < Fraction(1, 5):
        print("error: d must lie in [0, 1/5)", file=sys.stderr)
        return EXIT_USAGE
    if args.program == "chain":
        res = {p: args.grid for p in SEARCHABLE} if args.grid else None
        results = corroborate_chain(d, res, workers=args.threads)
        mono = chain_is_monotone(results)
        rep.add("monotone maxima", "P9 <= P10 <= P11 <= P12 within 1e-9", mono)
    else:
        results = [optimize(SearchConfig(args.program, d, resolution=args.grid, workers=args.threads))]
        mono = True
    ok = mono
    for r in results:
        good = r.margin is None or r.margin >= 0
        ok &= good
        rep.add(f"{r.program.name} below closed form", "exact value at the float argmax is at most w13(d)",
                good, {"exact_value": q(r.exact_value), "upper_bound": q(r.upper_bound) if r.upper_bound is not None else None,
                       "margin": q(r.margin) if r.margin is not None else None},
                best_value=r.best_value, error_bound=r.error_bound)
        pt = ", ".join(f"{k}={v:.12g}" for k, v in r.best_point.items())
        print(f"{r.program.name}: max {r.best_value:.15g} at ({pt}); exact {float(r.exact_value):.15g}; "
              f"bound {float(r.upper_bound):.15g}; margin {float(r.margin):.3e}")
        for note in r.notes:
            print(f"  {note}")
    rep.extra["results"] = [r.to_dict() for r in results]
    if d < Fraction(1, 4):
        rep.add("closed form below one", "w13(d) < 1", w13(d) < 1, {"w13": q(w13(d))})
        ok &= w13(d) < 1
    print(f"verdict: {'PASS' if ok else 'FAIL'}")
    return _emit(rep, EXIT_OK if ok else EXIT_FAIL, args.report)


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="k4frac", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify-graph", help="compute every K4 weight and check the decomposition")
    v.add_argument("path")
    m = v.add_mutually_exclusive_group()
    m.add_argument("--exact", dest="mode", action="store_const", const="exact")
    m.add_argument("--fast", dest="mode", action="store_const", const="float")
    v.add_argument("--exact-checks", type=int, default=20, help="K4s re-verified exactly in --fast mode")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--weights", help="write the weight table here")
    v.add_argument("--report")
    v.set_defaults(func=cmd_verify_graph)

    gp = sub.add_parser("gen", help="write a corpus graph as an edge list")
    gp.add_argument("kind", choices=("complete", "complete-minus-matching", "random-min-degree"))
    gp.add_argument("--n", type=int, required=True)
    gp.add_argument("--delta", type=int)
    gp.add_argument("--seed", type=int, default=0)
    gp.add_argument("--p", type=float, help="edge probability before repair (default delta/(n-1))")
    gp.add_argument("--out")
    gp.set_defaults(func=cmd_gen)

    c = sub.add_parser("chain-check", help="sampled pointwise checks of the relaxation chain")
    c.add_argument("--d", type=rational, default=Fraction(2, 33))
    c.add_argument("--samples", type=int, default=10_000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--threads", type=int, default=1)
    c.add_argument("--only", action="append", choices=list(CHECKS), help="run only this check (repeatable)")
    c.add_argument("--report")
    c.set_defaults(func=cmd_chain_check)

    s = sub.add_parser("certify", help="exact sign certificate for W(d) on [lo, hi]")
    s.add_argument("--lo", type=rational, default=Fraction(0))
    s.add_argument("--hi", type=rational, default=Fraction(2, 33))
    s.add_argument("--report")
    s.set_defaults(func=cmd_certify)

    o = sub.add_parser("optimize", help="grid plus local search for P9..P12, re-checked exactly")
    o.add_argument("--program", default="P12", type=str.upper,
                   choices=[p.name for p in SEARCHABLE] + ["CHAIN"])
    o.add_argument("--d", type=rational, default=Fraction(2, 33))
    o.add_argument("--grid", type=int, help="points per axis (default depends on the program)")
    o.add_argument("--threads", type=int, default=1)
    o.add_argument("--report")
    o.set_defaults(func=cmd_optimize)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "program", None) == "CHAIN":
        args.program = "chain"
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
