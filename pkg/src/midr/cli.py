"""Command-line front end.

Exit codes: 0 ok, 1 usage, 2 validation, 3 size guard exceeded,
4 truthfulness violations found by ``audit``.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

from . import io
from .bench import doubling_ratios, sweep
from .distribution import sample
from .lowerbound import gen_lb_instance
from .mechanism import Mechanism, MechanismOutcome, canonical_variant
from .oracle import GuardExceeded, truthfulness_audit, unweighted_opt
from .range_core import ParameterError
from .structured import PreconditionError
from .valuations import QueryCounter, ValuationError, as_fraction, validate

EXIT_OK, EXIT_USAGE, EXIT_VALIDATION, EXIT_GUARD, EXIT_VIOLATION = 0, 1, 2, 3, 4
DEFAULT_EPSILON = Fraction(1, 4)
OPT_REPORT_LIMIT = 10 ** 6  # n * m^2 budget for the optional OPT check


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _rational(text):
    try:
        return as_fraction(text)
    except ValuationError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--epsilon", type=_rational, help="approximation parameter p/q")
    common.add_argument("--variant", choices=("standard-fixed", "standard-general", "restricted"))
    common.add_argument("--output", help="write the JSON report here instead of stdout")

    p = _Parser(prog="midr", description="Truthful-in-expectation multi-unit auctions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (("solve", "optimal range distribution"),
                       ("payments", "distribution plus Clarke payments"),
                       ("sample", "distribution plus one seeded draw"),
                       ("audit", "exact truthfulness audit")):
        sp = sub.add_parser(name, parents=[common], help=text)
        sp.add_argument("--input", required=True, help="instance JSON file")
        if name == "sample":
            sp.add_argument("--seed", type=int, required=True)
        if name == "audit":
            sp.add_argument("--misreports", type=int, default=20)
            sp.add_argument("--seed", type=int, default=0)
    sp = sub.add_parser("bench", parents=[common], help="query/time sweep")
    sp.add_argument("--ms", type=int, nargs="+", help="item counts (default 2^10..2^20)")
    sp.add_argument("--ns", type=int, nargs="+", help="bidder counts (default 2 8 64)")
    sp.add_argument("--seed", type=int, default=0)
    sp = sub.add_parser("gen-lb", parents=[common], help="write a hard restricted instance")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--sigma", type=_rational, required=True)
    sp.add_argument("--C", type=_rational, required=True, dest="C")
    sp.add_argument("--eta", type=_rational, default=Fraction(0))
    return p


def _emit(doc, output):
    text = io.dumps(doc)
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _load(args):
    inst, opts = io.parse_instance(args.input)
    epsilon = args.epsilon or opts.get("epsilon") or DEFAULT_EPSILON
    variant = canonical_variant(args.variant or opts.get("variant") or "standard-general")
    strict = variant == "restricted"
    report = validate(inst, require_strict=strict)
    if not report.ok:
        family = opts.get("family") or {}
        only_strictness = all("strictly" in msg for _, _, msg in report.problems)
        if strict and only_strictness and family.get("name") == "I_k":
            print("warning: generated I_k instance is not strictly increasing (eta = 0)",
                  file=sys.stderr)
        else:
            raise ValuationError("; ".join(f"bidder {i}, bundle {s}: {msg}"
                                           for i, s, msg in report.problems[:5]))
    return inst, opts, epsilon, variant


def _cmd_run(args):
    inst, opts, epsilon, variant = _load(args)
    mech = Mechanism(inst.m, inst.n, epsilon, variant)
    counter = QueryCounter(inst)
    seed = args.seed if args.command == "sample" else None
    if args.command == "payments":
        outcome = mech.run(inst, seed)
    else:
        dist, welfare = mech.solve(inst)
        outcome = MechanismOutcome(dist, welfare, [], [],
                                   sample(dist, seed) if seed is not None else None, seed)
    queries = [counter.count(i) for i in range(inst.n)]
    opt = unweighted_opt(inst) if inst.n * inst.m ** 2 <= OPT_REPORT_LIMIT else None
    _emit(io.report_from_outcome(inst, epsilon, variant, outcome, opt, queries), args.output)
    return EXIT_OK


def _cmd_audit(args):
    inst, opts, epsilon, variant = _load(args)
    rep = truthfulness_audit(inst, epsilon, variant, args.misreports, args.seed,
                             instance_id=str(args.input))
    doc = {"input": {"m": inst.m, "n": inst.n, "epsilon": epsilon, "variant": variant},
           "summary": rep.summary(),
           "violations": [{"bidder": e.bidder, "misreport": e.misreport,
                           "truthful_utility": e.truthful_utility,
                           "deviant_utility": e.deviant_utility} for e in rep.violations]}
    _emit(doc, args.output)
    return EXIT_OK if rep.ok else EXIT_VIOLATION


def _cmd_bench(args):
    epsilon = args.epsilon or DEFAULT_EPSILON
    kw = {"epsilon": epsilon, "seed": args.seed}
    if args.ms:
        kw["ms"] = args.ms
    if args.ns:
        kw["ns"] = args.ns

    def progress(row):
        print(f"n={row.n:4d} m={row.m:8d} queries={row.queries:8d} "
              f"seconds={row.seconds:8.3f}", file=sys.stderr)

    rows = sweep(progress=progress, **kw)
    ratios = doubling_ratios(rows)
    doc = {"rows": [r.as_dict() for r in rows],
           "doubling_ratios": {str(n): {str(m): round(q, 4) for m, q in rs.items()}
                               for n, rs in ratios.items()}}
    _emit(doc, args.output)
    return EXIT_OK


def _cmd_gen_lb(args):
    try:
        lb = gen_lb_instance(args.m, args.k, args.sigma, args.C, args.eta)
    except ValueError as exc:
        raise ValuationError(str(exc)) from exc
    alloc, welfare = lb.optimum
    family = {"name": "I_k", "k": lb.k, "sigma": lb.sigma, "C": lb.C, "eta": lb.eta,
              "optimum": {"allocation": list(alloc), "welfare": welfare}}
    doc = io.instance_to_dict(lb.instance, variant="restricted", family=family,
                              epsilon=args.epsilon)
    _emit(doc, args.output)
    return EXIT_OK


COMMANDS = {"solve": _cmd_run, "payments": _cmd_run, "sample": _cmd_run,
            "audit": _cmd_audit, "bench": _cmd_bench, "gen-lb": _cmd_gen_lb}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse: --help or a usage error
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except GuardExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (io.SchemaError, ValuationError, ParameterError, PreconditionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
