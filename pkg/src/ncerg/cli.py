"""``ncerg`` command line.

Exit codes: 0 success, 1 validation error, 2 runtime error, 3 check failure.
Set ``NCERG_LOG`` (``DEBUG``, ``INFO``, ``WARNING``, ...) for log output on stderr.
"""

import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from .algebra import AlgebraSpec
from .ds import verify_ds_plus
from .experiment import (
    ConfigError,
    ExperimentRuntimeError,
    build_operator,
    dump_json,
    identity_sweep,
    load_config,
    probe_from_config,
    run_experiment,
)
from .linalg import EigensolverError
from .sequences import Blocks, run_decomposition, sequence_from_json

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME, EXIT_CHECK = 0, 1, 2, 3
IDENTITY_TOL = 1e-10


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


def cmd_run(args):
    report = run_experiment(load_config(args.config), out_dir=args.out, seed=args.seed)
    conv = report["convergence"]
    print(f"terminal residual {report['terminal_residual']:.6e}")
    print(f"witness decision {conv['decision']} (mode {conv['mode']}, eps {conv['eps']})")
    print(f"bundle written to {args.out}")
    return EXIT_OK


def cmd_check_ds(args):
    recipe = _read_json(args.recipe)
    extra = set(recipe) - {"algebra", "operator", "seed"}
    if extra:
        raise ConfigError([f"recipe: unknown fields {sorted(extra)}"])
    try:
        alg = AlgebraSpec.from_json(recipe["algebra"])
        rng = np.random.default_rng(recipe.get("seed", 0))
        op = build_operator(recipe["operator"], alg, rng, allow_hooks=True)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError([f"recipe: {exc}"]) from exc
    report = verify_ds_plus(op, sample_count=args.samples, tol=args.tol, seed=args.seed)
    sys.stdout.write(dump_json(report.to_json()))
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_gen_seq(args):
    try:
        seq = sequence_from_json(_read_json(args.spec))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError([f"sequence: {exc}"]) from exc
    k = seq.prefix(args.N)
    ni = seq.interval_index(args.N) if isinstance(seq, Blocks) else run_decomposition(k)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["n", "k", "density", "ratio", "N_I"])
    running_max = 0.0
    for n in range(args.N):
        kn = int(k[n])
        if n >= 1:
            running_max = max(running_max, kn / n)
        w.writerow([n, kn, repr((n + 1) / (kn + 1)), repr(running_max) if n >= 1 else "", int(ni[n])])
    return EXIT_OK


def cmd_probe_buem(args):
    res = probe_from_config(load_config(args.config), args.samples)
    sys.stdout.write(dump_json(res.to_json()))
    return EXIT_OK if res.passed else EXIT_CHECK


def cmd_check_identities(args):
    out = identity_sweep(args.seed, args.instances)
    worst = max(out["prop31"], out["prop32"])
    print(f"instances {out['instances']}")
    print(f"max transfer identity residual {worst:.3e}")
    print(f"max subsequence gap excess {out['gap_excess']:.3e}")
    ok = worst <= IDENTITY_TOL and out["gap_excess"] <= IDENTITY_TOL
    return EXIT_OK if ok else EXIT_CHECK


def build_parser():
    parser = argparse.ArgumentParser(prog="ncerg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment config and write a report bundle")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("check-ds", help="sample-check the DS+ contraction properties of a recipe")
    p.add_argument("--recipe", required=True, help='JSON {"algebra": ..., "operator": ...}')
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_check_ds)

    p = sub.add_parser("gen-seq", help="print a sequence prefix with density, ratio and N_I columns")
    p.add_argument("--spec", required=True)
    p.add_argument("-N", type=int, required=True)
    p.set_defaults(func=cmd_gen_seq)

    p = sub.add_parser("probe-buem", help="run the b.u.e.m. probe of a config")
    p.add_argument("--config", required=True)
    p.add_argument("--samples", type=int)
    p.set_defaults(func=cmd_probe_buem)

    p = sub.add_parser("check-identities", help="sweep the transfer identities over random instances")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--instances", type=int, default=100)
    p.set_defaults(func=cmd_check_identities)
    return parser


def main(argv=None):
    level = os.environ.get("NCERG_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ExperimentRuntimeError, EigensolverError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
