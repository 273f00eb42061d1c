"""Command-line front end.

Exit codes: 0 success, 1 runtime or numerical failure, 2 usage or validation
failure (bad flags, malformed input files, dimension mismatches).
"""
import argparse
import logging
import sys
import time

import numpy as np

from . import __version__
from .aggregation import DENSE, Sampled, TaskWeights, aggregate_refit
from .errors import FormatError, InputError, LcmError
from .experiments import (
    COMPARE_HEADER,
    RESNET34_DIMS,
    bench,
    compare,
    format_memory_report,
    growth_exponent,
    memory_report,
)
from .fitting import run_fit
from .formats import read_features, read_model, write_feature_matrix, write_model
from .model import FitConfig
from .ssm import gaussian_nll_per_sample, sample

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _int_list(text):
    try:
        vals = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _positive_int(text):
    val = int(text)
    if val < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {val}")
    return val


def _fit_config(args):
    return FitConfig(learning_rate=args.lr, epochs=args.epochs, seed=args.seed)


def cmd_fit(args):
    batch = read_features(args.input)
    if batch.n < 2:
        raise InputError(f"fitting needs at least 2 samples, {args.input} has {batch.n}")
    if args.center:
        batch, mu = batch.center()
    else:
        try:
            batch = type(batch)(batch.data, centered=True)
        except InputError as exc:
            raise InputError(f"{exc}; pass --center to subtract column means") from None
        mu = None
    result = run_fit(batch, _fit_config(args), mu=mu)
    write_model(result.params, args.out)
    print(f"initial_loss={result.initial_loss:.12g}")
    if args.epochs > 0:
        print(f"final_loss={result.best_loss:.12g}")
        print(f"best_epoch={result.best_epoch}")
    print(f"seconds={result.seconds:.3f}")


def cmd_nll(args):
    p = read_model(args.model)
    batch = read_features(args.input)
    if batch.dim != p.dim:
        raise InputError(f"dimension mismatch: model has {p.dim}, input has {batch.dim} columns")
    per = gaussian_nll_per_sample(p, batch)
    print(f"{float(np.mean(per)):.12g}")
    if args.per_sample:
        for val in per:
            print(f"{val:.12g}")


def cmd_sample(args):
    p = read_model(args.model)
    write_feature_matrix(sample(p, args.n, args.seed), args.out)


def cmd_aggregate(args):
    p_old = read_model(args.old)
    p_new = read_model(args.new)
    if p_old.dim != p_new.dim:
        raise InputError(f"dimension mismatch: old model has {p_old.dim}, new has {p_new.dim}")
    weights = TaskWeights(args.n_old, args.n_new)
    mode = DENSE if args.mode == "dense" else Sampled(args.samples, args.seed)
    result = aggregate_refit(p_old, p_new, weights, _fit_config(args), mode, return_result=True)
    write_model(result.params, args.out)
    print(f"initial_loss={result.initial_loss:.12g}")
    print(f"final_loss={result.best_loss:.12g}")


def cmd_compare(args):
    config = FitConfig(learning_rate=args.lr, epochs=args.epochs, seed=args.seed)
    res = compare(args.dims, args.n_train, args.n_test, args.seed, args.structure, config)
    print(f"# split seed {args.seed}; log-likelihoods are held-out nats per dimension")
    print(COMPARE_HEADER)
    print(res.csv_line())


def cmd_bench(args):
    rows = bench(args.dims, n=args.n, seed=args.seed, repeats=args.repeats)
    print("dim,frobenius_seconds,nll_seconds")
    for r in rows:
        print(f"{r.dim},{r.frobenius_seconds:.6g},{r.nll_seconds:.6g}")
    dims = [r.dim for r in rows]
    print(f"growth_exponent_frobenius={growth_exponent(dims, [r.frobenius_seconds for r in rows]):.4f}")
    print(f"growth_exponent_nll={growth_exponent(dims, [r.nll_seconds for r in rows]):.4f}")


def cmd_memreport(args):
    if args.vectors_per_dim < 1:
        raise InputError("--vectors-per-dim must be >= 1")
    print(format_memory_report(memory_report(args.dims, args.vectors_per_dim)))


def build_parser():
    parser = argparse.ArgumentParser(prog="lapcov", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def fit_knobs(p):
        p.add_argument("--lr", type=float, default=0.01)
        p.add_argument("--epochs", type=int, default=200)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("fit", help="fit an LCM to a feature file")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--center", action="store_true", help="subtract column means and store them as mu")
    fit_knobs(p)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("nll", help="mean Gaussian NLL of a feature file under a model")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--per-sample", action="store_true")
    p.set_defaults(func=cmd_nll)

    p = sub.add_parser("sample", help="draw samples from a model into an FMX file")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("aggregate", help="class-count-weighted aggregation and refit")
    p.add_argument("--old", required=True)
    p.add_argument("--new", required=True)
    p.add_argument("--n-old", type=_positive_int, required=True)
    p.add_argument("--n-new", type=_positive_int, required=True)
    p.add_argument("--mode", choices=("dense", "sampled"), default="dense")
    p.add_argument("--samples", type=_positive_int, default=100000)
    p.add_argument("--out", required=True)
    fit_knobs(p)
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("compare", help="diagonal vs LCM held-out log-likelihood on synthetic data")
    p.add_argument("--dims", type=_positive_int, required=True)
    p.add_argument("--n-train", type=_positive_int, required=True)
    p.add_argument("--n-test", type=_positive_int, required=True)
    p.add_argument("--structure", default="ar1:0.7", help="ar1:<rho> or planted")
    fit_knobs(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bench", help="timing sweep of the matrix-free paths")
    p.add_argument("--dims", type=_int_list, default=[1024, 4096, 16384, 65536])
    p.add_argument("--n", type=_positive_int, default=8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--repeats", type=_positive_int, default=3)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("memreport", help="LCM vs dense covariance storage")
    p.add_argument("--dims", type=_int_list, default=list(RESNET34_DIMS))
    p.add_argument("--vectors-per-dim", type=int, default=2)
    p.set_defaults(func=cmd_memreport)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        args.func(args)
    except (InputError, FormatError, FileNotFoundError) as exc:
        print(f"lapcov {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LcmError, OSError) as exc:
        print(f"lapcov {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
