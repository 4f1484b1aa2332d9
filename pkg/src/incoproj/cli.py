"""Command-line interface.

Subcommands: ``design`` (run one projection optimizer), ``bench`` (full
benchmark sweep from a config file), ``hist`` (Gram histogram), ``ksvd``
and ``coupled`` (dictionary learning).  Every output is a deterministic
CSV: running a command twice with the same inputs produces byte-identical
files.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .altproj import AltProjConfig, altproj_optimize
from .coherence import coherence_report, offdiag_histogram
from .dictlearn import (
    CoupledConfig,
    FixedProjection,
    SapiroInner,
    TrainingSet,
    coupled_ksvd,
    ksvd,
)
from .elad import EladConfig, FixedThreshold, RelativeThreshold, elad_optimize
from .errors import ConfigError, IncoprojError
from .harness import derive_seed, emit_reports, load_config, run_sweep
from .linalg import Dictionary, gram
from .matrixio import read_matrix, write_csv, write_histogram, write_matrix
from .sapiro import sapiro_optimize

PAPER_SCALE = dict(n=200, k=400, m=30, N=10000, S_range=tuple(range(1, 11)))


def _load_or_generate_dictionary(args) -> Dictionary:
    if args.dict:
        return Dictionary(read_matrix(args.dict))
    if args.n is None or args.k is None:
        raise ConfigError("provide --dict FILE or both --n and --k")
    seed = args.dict_seed if args.dict_seed is not None else derive_seed(0, "cli-dictionary")
    return Dictionary(np.random.default_rng(seed).standard_normal((args.n, args.k)))


def _cmd_design(args) -> int:
    D = _load_or_generate_dictionary(args)
    os.makedirs(args.out_dir, exist_ok=True)
    seed = args.seed
    if args.method == "elad":
        if args.mode == "fixed":
            threshold = FixedThreshold(args.t)
        else:
            threshold = RelativeThreshold(args.percent)
        cfg = EladConfig(
            threshold_mode=threshold,
            gamma=args.gamma,
            iterations=args.iterations,
            m=args.m,
            seed=seed,
        )
        P, trace = elad_optimize(D, cfg)
        trace.to_csv(os.path.join(args.out_dir, "trace.csv"))
    elif args.method == "altproj":
        cfg = AltProjConfig(t=args.t, m=args.m, iterations=args.iterations, seed=seed)
        P, trace = altproj_optimize(D, cfg)
        trace.to_csv(os.path.join(args.out_dir, "trace.csv"))
    elif args.method == "sapiro":
        P, trace = sapiro_optimize(D, args.m, seed)
        write_csv(
            os.path.join(args.out_dir, "trace.csv"), ["step", "objective"], enumerate(trace)
        )
    else:
        raise ConfigError(f"unknown method {args.method!r}")

    write_matrix(os.path.join(args.out_dir, "projection.csv"), P)
    report = coherence_report(P @ D.data, t=args.t, bins=args.bins)
    write_histogram(os.path.join(args.out_dir, "gram_hist.csv"), report.histogram)
    mu_t = "n/a" if report.mu_t is None else repr(report.mu_t)
    print(f"method={args.method} mu={report.mu!r} mu_t[{args.t!r}]={mu_t}")
    return 0


def _cmd_bench(args) -> int:
    cfg = load_config(args.config)
    if args.paper_scale:
        from dataclasses import replace

        cfg = replace(cfg, **PAPER_SCALE)
    records, summary = run_sweep(cfg)
    emit_reports(records, summary, args.out_dir)
    print(f"wrote {len(records)} trial records to {args.out_dir}")
    return 0


def _cmd_hist(args) -> int:
    D = read_matrix(args.dict)
    M = read_matrix(args.proj) @ D if args.proj else D
    write_histogram(args.out, offdiag_histogram(gram(M), args.bins))
    return 0


def _cmd_ksvd(args) -> int:
    X = read_matrix(args.signals)
    D, Theta, trace = ksvd(X, k=args.atoms, S=args.sparsity, iterations=args.iterations, seed=args.seed)
    os.makedirs(args.out_dir, exist_ok=True)
    write_matrix(os.path.join(args.out_dir, "dictionary.csv"), D)
    write_matrix(os.path.join(args.out_dir, "coefficients.csv"), Theta)
    trace.to_csv(os.path.join(args.out_dir, "trace.csv"))
    print(f"ksvd final objective = {trace.objective[-1]!r}")
    return 0


def _cmd_coupled(args) -> int:
    X = read_matrix(args.signals)
    Y = read_matrix(args.measurements)
    m = Y.shape[0]
    if args.inner == "sapiro":
        inner = SapiroInner(seed=args.inner_seed)
    elif args.inner == "elad":
        if args.mode == "fixed":
            threshold = FixedThreshold(args.t)
        else:
            threshold = RelativeThreshold(args.percent)
        inner = EladConfig(
            threshold_mode=threshold,
            gamma=args.gamma,
            iterations=args.inner_iterations,
            m=m,
            seed=args.inner_seed,
        )
    elif args.inner == "altproj":
        inner = AltProjConfig(t=args.t, m=m, iterations=args.inner_iterations, seed=args.inner_seed)
    elif args.inner == "fixed":
        if not args.proj:
            raise ConfigError("--inner fixed requires --proj FILE")
        inner = FixedProjection(read_matrix(args.proj))
    else:
        raise ConfigError(f"unknown inner optimizer {args.inner!r}")

    cfg = CoupledConfig(
        lam=args.lam,
        S=args.sparsity,
        max_outer_iterations=args.outer,
        inner=inner,
        seed=args.seed,
    )
    P, D, Theta, trace = coupled_ksvd(TrainingSet(X=X, Y=Y), k=args.atoms, cfg=cfg)
    os.makedirs(args.out_dir, exist_ok=True)
    write_matrix(os.path.join(args.out_dir, "projection.csv"), P)
    write_matrix(os.path.join(args.out_dir, "dictionary.csv"), D)
    write_matrix(os.path.join(args.out_dir, "coefficients.csv"), Theta)
    trace.to_csv(os.path.join(args.out_dir, "trace.csv"))
    print(f"coupled final terms = {trace.term1[-1]!r}, {trace.term2[-1]!r}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="incoproj",
        description="Design incoherent projections and benchmark sparse recovery.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="run one projection optimizer on a dictionary")
    p.add_argument("--method", required=True, choices=["elad", "sapiro", "altproj"])
    p.add_argument("--dict", help="dictionary matrix CSV (no header)")
    p.add_argument("--n", type=int, help="rows of a generated Gaussian dictionary")
    p.add_argument("--k", type=int, help="columns of a generated Gaussian dictionary")
    p.add_argument("--dict-seed", type=int, default=None)
    p.add_argument("--m", type=int, required=True, help="projection rows")
    p.add_argument("--mode", choices=["fixed", "relative"], default="relative")
    p.add_argument("--t", type=float, default=0.26, help="threshold (fixed mode / altproj)")
    p.add_argument("--percent", type=float, default=26.0, help="relative-mode percentile")
    p.add_argument("--gamma", type=float, default=0.6)
    p.add_argument("--iterations", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("bench", help="run a benchmark sweep from a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument(
        "--paper-scale",
        action="store_true",
        help="override sizes to n=200 k=400 m=30 N=10000 S=1..10 (hours of runtime)",
    )
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("hist", help="Gram off-diagonal histogram of D or P @ D")
    p.add_argument("--dict", required=True)
    p.add_argument("--proj", help="optional projection matrix CSV")
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_hist)

    p = sub.add_parser("ksvd", help="learn a dictionary from training signals")
    p.add_argument("--signals", required=True, help="n x p training matrix CSV")
    p.add_argument("--atoms", type=int, required=True)
    p.add_argument("--sparsity", type=int, required=True)
    p.add_argument("--iterations", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_ksvd)

    p = sub.add_parser("coupled", help="jointly learn projection and dictionary")
    p.add_argument("--signals", required=True, help="n x p training matrix CSV")
    p.add_argument("--measurements", required=True, help="m x p measurement matrix CSV")
    p.add_argument("--atoms", type=int, required=True)
    p.add_argument("--sparsity", type=int, required=True)
    p.add_argument("--lam", type=float, default=0.5)
    p.add_argument("--outer", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inner", choices=["sapiro", "elad", "altproj", "fixed"], default="sapiro")
    p.add_argument("--inner-seed", type=int, default=0)
    p.add_argument("--inner-iterations", type=int, default=50)
    p.add_argument("--mode", choices=["fixed", "relative"], default="relative")
    p.add_argument("--t", type=float, default=0.26)
    p.add_argument("--percent", type=float, default=26.0)
    p.add_argument("--gamma", type=float, default=0.6)
    p.add_argument("--proj", help="projection matrix CSV for --inner fixed")
    p.set_defaults(func=_cmd_coupled)
    p.add_argument("--out-dir", required=True)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (IncoprojError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
