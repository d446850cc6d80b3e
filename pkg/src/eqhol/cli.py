"""Command-line front end.

    eqhol run FILE [--sizes i=2,w=3] [--cap N] [--algebra atoms=K --q FILE] [--json]
    eqhol dualize -e EXPR [--env q0]
    eqhol normalize -e EXPR [--env church]
    eqhol check -e EXPR [--env q0] [--include modal]
    eqhol measure --algebra atoms=2
    eqhol packs

Exit status: 0 all checks pass, 1 some check failed, 2 input error,
3 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import CapExceeded, KernelError
from .kernel import print_term
from .reduction import canonical_type_vars, normalize
from .runner import RunOptions, load_q, parse_algebra, parse_sizes, run_file
from .semantics import DEFAULT_CAP, check_valid
from .theory import base_env, dualize, load_theory_file, pack_names

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_CAP = 0, 1, 2, 3
ENVS = ("q0", "via-positiva", "via-negativa", "church", "none")


def _env(args):
    types = [t for t in (args.types or "i").split(",") if t]
    env = base_env(*types)
    if args.env != "none":
        env = env.include(args.env)
    for p in args.include or ():
        env = env.include(p)
    if getattr(args, "theory", None):
        env, _ = load_theory_file(args.theory, env)
    if args.strict:
        env = env._replace(strict=True)
    return env


def _options(args):
    q = load_q(args.q) if args.q else None
    atoms = parse_algebra(args.algebra) if args.algebra else None
    return RunOptions(sizes=parse_sizes(args.sizes) if args.sizes else None, cap=args.cap,
                      atoms=atoms, q=q, strict=args.strict)


def cmd_run(args):
    report = run_file(args.file, _options(args))
    timings = not args.no_timings
    print(report.to_json(timings) if args.json else report.format(timings))
    return report.exit_status


def cmd_dualize(args):
    env = _env(args)
    d = canonical_type_vars(normalize(dualize(env.term(args.expr), env)))
    print(print_term(d, env.notations))
    return EXIT_OK


def cmd_normalize(args):
    env = _env(args)
    t = env.term(args.expr)
    nf = canonical_type_vars(normalize(t, None if args.no_unfold else env, args.mode))
    print(print_term(nf, env.notations))
    return EXIT_OK


def cmd_check(args):
    env = _env(args)
    opts = _options(args)
    alg = tables = None
    if opts.atoms is not None:
        from .runner import _algebra

        alg, tables = _algebra(opts.atoms, opts.q, opts.sizes or {}, opts.cap)
    v = check_valid(args.expr, env, opts.sizes, opts.cap, alg=alg, q=tables)
    if args.json:
        out = {"verdict": "valid" if v.valid else "countermodel", "models": v.models,
               "witness": v.countermodel.to_dict() if v.countermodel else None}
        print(json.dumps(out, indent=2))
    elif v.valid:
        print(f"valid ({v.models} models)")
    else:
        print("countermodel:")
        print(v.countermodel.format())
    return EXIT_OK if v.valid else EXIT_FAIL


def cmd_measure(args):
    from .bvalued import BoolAlg, format_measurements, measure_connectives

    env = _env(args)
    alg = BoolAlg(parse_algebra(args.algebra or "atoms=2"))
    print(format_measurements(measure_connectives(env, alg, cap=args.cap), alg))
    return EXIT_OK


def cmd_packs(args):
    for name in pack_names():
        print(name)
    return EXIT_OK


def _common(p, env=True):
    p.add_argument("--sizes", help="base sizes, e.g. i=2,w=1..3")
    p.add_argument("--cap", type=int, default=DEFAULT_CAP, help="function-space cap")
    p.add_argument("--algebra", help="Boolean-valued mode, e.g. atoms=2")
    p.add_argument("--q", help="JSON file (or text) with the degree-of-equality table")
    p.add_argument("--strict", action="store_true", help="unknown identifiers are errors")
    p.add_argument("--json", action="store_true", help="machine-readable output")
    if env:
        p.add_argument("--env", choices=ENVS, default="q0", help="connective definitions")
        p.add_argument("--include", action="append", metavar="PACK", help="extra pack")
        p.add_argument("--types", help="comma-separated base types (default i)")
        p.add_argument("--theory", help="theory file loaded on top of the environment")


def build_parser():
    ap = argparse.ArgumentParser(prog="eqhol", description="Equality-based higher-order logic "
                                 "workbench: normalisation, finite models, embeddings.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run the checks of a theory file")
    p.add_argument("file")
    p.add_argument("--no-timings", action="store_true", help="omit wall times from the report")
    _common(p, env=False)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("dualize", help="swap Q and D after unfolding")
    p.add_argument("-e", "--expr", required=True)
    _common(p)
    p.set_defaults(func=cmd_dualize)

    p = sub.add_parser("normalize", help="beta-eta normal form after unfolding")
    p.add_argument("-e", "--expr", required=True)
    p.add_argument("--mode", choices=("beta", "beta-eta"), default="beta-eta")
    p.add_argument("--no-unfold", action="store_true", help="keep defined constants")
    _common(p)
    p.set_defaults(func=cmd_normalize)

    p = sub.add_parser("check", help="validity of a single formula")
    p.add_argument("-e", "--expr", required=True)
    _common(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("measure", help="defined connectives over a Boolean algebra")
    _common(p)
    p.set_defaults(func=cmd_measure)

    p = sub.add_parser("packs", help="list shipped definition packs")
    p.set_defaults(func=cmd_packs)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CapExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (KernelError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
