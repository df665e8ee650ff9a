"""Command-line entry point ``evidence``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from ..dpm_core import GammaPrior
from ..exceptions import EvidenceError
from ..oracle import dpm_exact_evidence, fm_exact_evidence
from .config import RunConfig
from .data import NORMAL_NULL, THREE_COMPONENT_NULL
from .experiments import BFConfig, bf_paths, build_prior, load_data, run
from .presets import PRESETS


def _tuning_pairs(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise argparse.ArgumentTypeError(f"tuning entries look like key=value, got {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = json.loads(v)
        except json.JSONDecodeError:
            out[k] = v
    return out


def _common(p):
    p.add_argument("--config", help="JSON run configuration; explicit flags take precedence")
    p.add_argument("--estimator")
    p.add_argument("--data", dest="dataset", help="data file (one value per line) or 'galaxy'")
    p.add_argument("--synthetic", help="JSON synthetic spec {means, scales, weights, n, seed}")
    p.add_argument("--scale", dest="data_scale", type=float, help="multiply the data by this factor")
    p.add_argument("--subset", type=int, help="use only the first N observations")
    p.add_argument("--preset", help=f"tuning preset ({', '.join(sorted(PRESETS))})")
    p.add_argument("--tuning", nargs="*", metavar="KEY=VALUE", help="estimator tuning overrides")
    p.add_argument("--reps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="worker processes (default: EVIDENCE_WORKERS or all cores)")
    p.add_argument("--out", help="results CSV path")
    p.add_argument("--reference", type=float, help="reference log evidence; also writes MSE-vs-time pairs")
    p.add_argument("--mse-out", dest="mse_out")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="evidence", description="Marginal likelihood estimators for Gaussian mixtures")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    fm = sub.add_parser("fm", help="finite mixture with K components")
    _common(fm)
    fm.add_argument("--k", dest="K", type=int)
    fm.add_argument("--alpha", type=float)

    dpm = sub.add_parser("dpm", help="Dirichlet process mixture")
    _common(dpm)
    dpm.add_argument("--gamma-a", type=float)
    dpm.add_argument("--gamma-b", type=float)

    orc = sub.add_parser("oracle", help="exact evidence by enumeration (small n only)")
    orc.add_argument("--model", choices=("fm", "dpm"), required=True)
    orc.add_argument("--data", dest="dataset", required=True)
    orc.add_argument("--scale", dest="data_scale", type=float, default=1.0)
    orc.add_argument("--subset", type=int)
    orc.add_argument("--k", dest="K", type=int, default=2)
    orc.add_argument("--alpha", type=float, default=1.0)
    orc.add_argument("--gamma-a", type=float, default=1.0)
    orc.add_argument("--gamma-b", type=float, default=1.0)
    orc.add_argument("--quad-nodes", type=int, default=200)

    bf = sub.add_parser("bf-paths", help="Bayes-factor paths of a finite-mixture null against the DPM")
    bf.add_argument("--k0", type=int, choices=(1, 3), default=1)
    bf.add_argument("--grid", default="10,25,50,100,200")
    bf.add_argument("--datasets", type=int, default=100)
    bf.add_argument("--seed", type=int, default=0)
    bf.add_argument("--sis-T", dest="sis_T", type=int, default=2000)
    bf.add_argument("--rlr-T1", dest="rlr_T1", type=int, default=2000)
    bf.add_argument("--rlr-T2", dest="rlr_T2", type=int, default=5000)
    bf.add_argument("--rlr-burnin", dest="rlr_burnin", type=int, default=1000)
    bf.add_argument("--workers", type=int)
    bf.add_argument("--out", required=True)

    sub.add_parser("presets", help="list tuning presets")
    return parser


def _run_config(args) -> RunConfig:
    base = {}
    if args.config:
        with open(args.config) as fh:
            base = json.load(fh)
    flags = {k: v for k, v in vars(args).items() if v is not None}
    for k in ("command", "config", "verbose", "synthetic", "tuning", "gamma_a", "gamma_b"):
        flags.pop(k, None)
    if args.synthetic:
        flags["dataset"] = {"synthetic": json.loads(args.synthetic)}
    tuning = {**base.get("tuning", {}), **_tuning_pairs(args.tuning)}
    merged = {**base, **flags, "model": args.command}
    if tuning:
        merged["tuning"] = tuning
    if args.command == "dpm" and (args.gamma_a is not None or args.gamma_b is not None):
        g = dict(base.get("gamma_prior", {"a": 1.0, "b": 1.0}))
        if args.gamma_a is not None:
            g["a"] = args.gamma_a
        if args.gamma_b is not None:
            g["b"] = args.gamma_b
        merged["gamma_prior"] = g
    return RunConfig.from_dict(merged)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.command == "presets":
            for name in sorted(PRESETS):
                p = PRESETS[name]
                print(f"{name}: model={p['model']} K={p.get('K', '-')} estimators={','.join(sorted(p['tuning']))}")
            return 0
        if args.command in ("fm", "dpm"):
            cfg = _run_config(args)
            records, manifest = run(cfg)
            for r in records:
                val = "failed: " + r.tuning.get("error", "") if r.log_evidence is None else f"{r.log_evidence:.6f}"
                se = "" if r.se_log is None else f" (se {r.se_log:.4f})"
                print(f"{r.estimator} seed={r.seed} log_evidence={val}{se} time={r.wall_time_s:.2f}s")
            ok = [r.log_evidence for r in records if r.log_evidence is not None]
            if ok:
                print(f"mean {np.mean(ok):.6f} sd {np.std(ok, ddof=1) if len(ok) > 1 else 0.0:.6f} over {len(ok)} reps")
            return 0 if manifest["n_failed"] < len(records) else 1
        if args.command == "oracle":
            cfg = RunConfig(model=args.model, estimator="sis" if args.model == "fm" else "chib-dpm",
                            dataset=args.dataset, K=args.K, data_scale=args.data_scale, subset=args.subset)
            cfg.validate()
            y, _ = load_data(cfg)
            prior = build_prior(cfg, y)
            if args.model == "fm":
                val = fm_exact_evidence(y, args.K, prior, args.alpha)
            else:
                val = dpm_exact_evidence(y, prior, GammaPrior(args.gamma_a, args.gamma_b), quad_nodes=args.quad_nodes)
            print(json.dumps({"model": args.model, "n": int(y.size), "log_evidence": val, "prior": prior.to_dict()}))
            return 0
        if args.command == "bf-paths":
            grid = [int(g) for g in args.grid.split(",") if g.strip()]
            null = NORMAL_NULL if args.k0 == 1 else THREE_COMPONENT_NULL
            cfg = BFConfig(null=dict(null), grid=grid, datasets=args.datasets, seed=args.seed, sis_T=args.sis_T,
                           rlr_T1=args.rlr_T1, rlr_T2=args.rlr_T2, rlr_burnin=args.rlr_burnin,
                           workers=args.workers, out=args.out)
            _, summary = bf_paths(cfg)
            for n, s in summary.items():
                print(f"n={n} fraction(log BF > 0)={s['fraction_positive']:.3f} mean log BF={s['mean_log_bf']:.3f}")
            return 0
    except (EvidenceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 1


if __name__ == "__main__":
    sys.exit(main())
