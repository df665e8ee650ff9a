"""Experiment orchestration: replicated runs, results files and Bayes-factor paths."""

from __future__ import annotations

import csv
import json
import logging
import math
import platform
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .. import __version__
from ..conjugate import NIGPrior, hyperparams_from_data
from ..dpm_core import GammaPrior
from ..dpm_evidence import rlr_evidence, run_dpm_estimator
from ..exceptions import ConfigError, EvidenceError
from ..fm_evidence import run_fm_estimator, sis_evidence
from .config import RunConfig, default_workers
from .data import SyntheticSpec, array_checksum, dataset_checksum, generate_synthetic, ingest_dataset

log = logging.getLogger(__name__)

CSV_HEADER = ["estimator", "log_evidence", "se_log", "seed", "wall_time_s", "tuning_json"]


def replicate_seed(base_seed: int, rep: int) -> int:
    """Independent 64-bit seed for replicate ``rep`` of a run seeded with ``base_seed``."""
    return int(np.random.SeedSequence([int(base_seed), int(rep)]).generate_state(1, np.uint64)[0])


def load_data(cfg: RunConfig):
    """(data, provenance) with the configured subset and scale applied."""
    if isinstance(cfg.dataset, dict):
        spec = SyntheticSpec.from_dict(cfg.dataset["synthetic"])
        y = generate_synthetic(spec)
        prov = {"synthetic": spec.to_dict()}
    else:
        y = ingest_dataset(cfg.dataset)
        prov = {"path": cfg.dataset, "file_sha256": dataset_checksum(cfg.dataset)}
    if cfg.subset is not None:
        if cfg.subset > y.size:
            raise ConfigError(f"subset {cfg.subset} exceeds the {y.size} available observations")
        y = y[: cfg.subset]
    y = y * float(cfg.data_scale)
    prov.update({"n": int(y.size), "data_scale": float(cfg.data_scale), "subset": cfg.subset,
                 "data_sha256": array_checksum(y)})
    return y, prov


def build_prior(cfg: RunConfig, y) -> NIGPrior:
    if isinstance(cfg.prior, dict):
        return NIGPrior(**cfg.prior)
    return hyperparams_from_data(y)


@dataclass
class Record:
    estimator: str
    log_evidence: float | None
    se_log: float | None
    seed: int
    wall_time_s: float
    tuning: dict = field(default_factory=dict)


def _run_one(task):
    cfg_d, y, prior_d, seed = task
    cfg = RunConfig(**cfg_d)
    prior = NIGPrior(**prior_d)
    t0 = time.perf_counter()
    try:
        if cfg.model == "fm":
            est = run_fm_estimator(cfg.estimator, y, cfg.K, prior, cfg.alpha, seed=seed, **cfg.tuning)
        else:
            est = run_dpm_estimator(cfg.estimator, y, prior, GammaPrior(**cfg.gamma_prior), seed=seed, **cfg.tuning)
        return Record(cfg.estimator, est.log_evidence, est.se_log, seed, est.wall_time, est.tuning)
    except (EvidenceError, ValueError, TypeError) as exc:
        return Record(cfg.estimator, None, None, seed, time.perf_counter() - t0,
                      {**cfg.tuning, "error": f"{type(exc).__name__}: {exc}"})


def _map(fn, tasks, workers):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def write_records(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for r in records:
            w.writerow([
                r.estimator,
                "" if r.log_evidence is None else repr(float(r.log_evidence)),
                "" if r.se_log is None else repr(float(r.se_log)),
                r.seed,
                repr(float(r.wall_time_s)),
                json.dumps(r.tuning, sort_keys=True),
            ])


def read_records(path) -> list:
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != CSV_HEADER:
            raise ConfigError(f"unexpected results header {header}")
        for row in reader:
            out.append(Record(
                row[0],
                None if row[1] == "" else float(row[1]),
                None if row[2] == "" else float(row[2]),
                int(row[3]),
                float(row[4]),
                json.loads(row[5]),
            ))
    return out


def mse_time_pairs(records, reference: float):
    """(wall time, squared error against ``reference``) for successful records."""
    return [(r.wall_time_s, (r.log_evidence - reference) ** 2) for r in records if r.log_evidence is not None]


def run(cfg: RunConfig):
    """Execute ``cfg.reps`` independent replicates and persist results and manifest."""
    y, prov = load_data(cfg)
    prior = build_prior(cfg, y)
    seeds = [replicate_seed(cfg.seed, i) for i in range(cfg.reps)]
    cfg_d = cfg.to_dict()
    tasks = [(cfg_d, y, prior.to_dict(), s) for s in seeds]
    workers = cfg.resolved_workers()
    t0 = time.perf_counter()
    records = _map(_run_one, tasks, workers)
    elapsed = time.perf_counter() - t0
    n_failed = sum(r.log_evidence is None for r in records)
    manifest = {
        "config": cfg_d,
        "dataset": prov,
        "prior": prior.to_dict(),
        "library_version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "workers": workers,
        "elapsed_s": elapsed,
        "n_failed": n_failed,
    }
    if cfg.out:
        out = Path(cfg.out)
        write_records(out, records)
        manifest_path = out.with_suffix(out.suffix + ".manifest.json")
        manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True))
        if cfg.reference is not None:
            mse_path = Path(cfg.mse_out) if cfg.mse_out else out.with_suffix(".mse.csv")
            with open(mse_path, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["wall_time_s", "squared_error"])
                for t, e in mse_time_pairs(records, cfg.reference):
                    w.writerow([repr(t), repr(e)])
    return records, manifest


# ---------------------------------------------------------------------------
# Bayes-factor paths


@dataclass
class BFConfig:
    null: dict
    grid: list
    datasets: int = 100
    seed: int = 0
    sis_T: int = 2000
    rlr_T1: int = 2000
    rlr_T2: int = 5000
    rlr_burnin: int = 1000
    alpha: float = 1.0
    gamma_prior: dict = field(default_factory=lambda: {"a": 1.0, "b": 1.0})
    workers: int | None = None
    out: str | None = None

    def validate(self):
        grid = list(self.grid)
        if not grid or any(int(g) != g or g < 2 for g in grid):
            raise ConfigError("grid must be a nonempty list of integers >= 2")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("grid must be strictly increasing")
        if self.datasets < 1:
            raise ConfigError("datasets must be positive")
        SyntheticSpec(n=max(grid), seed=0, **self.null)
        GammaPrior(**self.gamma_prior)


def _bf_dataset(task):
    cfg_d, d = task
    cfg = BFConfig(**cfg_d)
    spec = SyntheticSpec(n=max(cfg.grid), seed=replicate_seed(cfg.seed, d), **cfg.null)
    stream = generate_synthetic(spec)
    K0 = spec.K0
    gprior = GammaPrior(**cfg.gamma_prior)
    rows = []
    for j, n in enumerate(cfg.grid):
        y = stream[:n]
        s_num, s_den = replicate_seed(spec.seed, 2 * j), replicate_seed(spec.seed, 2 * j + 1)
        t0 = time.perf_counter()
        row = {"dataset": d, "n": int(n)}
        try:
            prior = hyperparams_from_data(y)
            num = sis_evidence(y, K0, prior, cfg.alpha, T=cfg.sis_T, seed=s_num)
            den = rlr_evidence(y, prior, gprior, "sis", T1=cfg.rlr_T1, T2=cfg.rlr_T2, burnin=cfg.rlr_burnin,
                               seed=s_den)
            row.update(log_bf=num.log_evidence - den.log_evidence, log_m_fm=num.log_evidence, se_fm=num.se_log,
                       log_m_dpm=den.log_evidence, se_dpm=den.se_log, error="")
        except (EvidenceError, ValueError) as exc:
            row.update(log_bf=None, log_m_fm=None, se_fm=None, log_m_dpm=None, se_dpm=None,
                       error=f"{type(exc).__name__}: {exc}")
        row["wall_time_s"] = time.perf_counter() - t0
        rows.append(row)
    return rows


BF_HEADER = ["dataset", "n", "log_bf", "log_m_fm", "se_fm", "log_m_dpm", "se_dpm", "wall_time_s", "error"]


def bf_summary(rows, grid):
    """Fraction of datasets with log BF > 0 at each n (failed cells excluded)."""
    out = {}
    for n in grid:
        vals = [r["log_bf"] for r in rows if r["n"] == n and r["log_bf"] is not None]
        out[int(n)] = {"fraction_positive": float(np.mean(np.array(vals) > 0)) if vals else math.nan,
                       "n_ok": len(vals), "mean_log_bf": float(np.mean(vals)) if vals else math.nan}
    return out


def bf_paths(cfg: BFConfig):
    """log Bayes factor of the K0-component null against the DPM along nested prefixes of each dataset."""
    cfg.validate()
    workers = cfg.workers if cfg.workers is not None else default_workers()
    cfg_d = asdict(cfg)
    per = _map(_bf_dataset, [(cfg_d, d) for d in range(cfg.datasets)], workers)
    rows = [r for block in per for r in block]
    summary = bf_summary(rows, cfg.grid)
    if cfg.out:
        out = Path(cfg.out)
        with open(out, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=BF_HEADER)
            w.writeheader()
            for r in rows:
                w.writerow({k: ("" if r[k] is None else r[k]) for k in BF_HEADER})
        out.with_suffix(out.suffix + ".summary.json").write_text(
            json.dumps({"config": cfg_d, "summary": summary, "library_version": __version__}, indent=2)
        )
    return rows, summary
