"""End-to-end acceptance checks. Each test prints one PASS/FAIL line, collected
again in the terminal summary under "acceptance criteria"."""

import math
import time

import numpy as np
import pytest
from conftest import small_dpm_data, small_fm_data
from test_conjugate import quad_marginal
from test_dpm_core import sequential_urn_log_prob
from test_mcstats import ar1

from mixture_evidence import GammaPrior, NIGPrior, hyperparams_from_data
from mixture_evidence.conjugate import ClusterSuffStats, cluster_log_marginal, predictive_log_ratio
from mixture_evidence.dpm_core import dpm_log_prior_z
from mixture_evidence.dpm_evidence import chib_dpm, rlr_evidence
from mixture_evidence.fm_core import run_fm_gibbs
from mixture_evidence.fm_evidence import (
    arithmetic_mean,
    bridge_sampling,
    chib,
    chib_partition,
    chib_permutation,
    sis_evidence,
    smc_evidence,
)
from mixture_evidence.harness.data import NORMAL_NULL, ingest_dataset
from mixture_evidence.harness.experiments import BFConfig, bf_paths, replicate_seed
from mixture_evidence.harness.presets import GALAXY_SCALE, GALAXY_SIS_SCAN
from mixture_evidence.mcstats import newey_west_variance
from mixture_evidence.oracle import dpm_exact_evidence, fm_exact_evidence
from mixture_evidence.partitions import (
    canonical_labels,
    canonical_labels_batch,
    log_partition_prior,
    partitions_count,
    set_partitions,
)

SEED = 20240


@pytest.fixture(scope="module")
def fm_small():
    y = small_fm_data()
    prior = hyperparams_from_data(y)
    return y, prior, fm_exact_evidence(y, 2, prior, 1.0)


def test_criterion_1_fm_oracle_agreement(fm_small, report):
    y, prior, exact = fm_small
    t0 = time.perf_counter()
    runs = {
        "am": arithmetic_mean(y, 2, prior, 1.0, T=10**6, seed=SEED),
        "chib": chib(y, 2, prior, 1.0, T=2 * 10**4, burnin=1000, seed=SEED),
        "chib-perm": chib_permutation(y, 2, prior, 1.0, T=2 * 10**4, burnin=1000, seed=SEED),
        "chib-partition": chib_partition(y, 2, prior, 1.0, T=5 * 10**4, burnin=1000, seed=SEED),
        "bridge": bridge_sampling(y, 2, prior, 1.0, seed=SEED),
        "smc": smc_evidence(y, 2, prior, 1.0, N=4000, seed=SEED),
        "sis": sis_evidence(y, 2, prior, 1.0, T=10**5, seed=SEED),
    }
    elapsed = time.perf_counter() - t0
    bad = []
    parts = []
    for name, est in runs.items():
        diff = est.log_evidence - exact
        ok = abs(diff) <= 3 * est.se_log
        if name in ("chib-perm", "sis", "bridge"):
            ok = ok and abs(diff) < 0.1
        parts.append(f"{name} {diff:+.4f}/{est.se_log:.4f}")
        if not ok:
            bad.append(name)
    ok = not bad and elapsed < 120
    detail = f"exact {exact:.4f}; diff/se: " + ", ".join(parts) + f"; {elapsed:.0f}s"
    report(1, ok, detail + (f"; off: {bad}" if bad else ""))
    assert ok


def test_criterion_2_dpm_oracle_agreement(report):
    y = small_dpm_data()
    prior = hyperparams_from_data(y)
    g = GammaPrior(1.0, 1.0)
    exact = dpm_exact_evidence(y, prior, g)
    t0 = time.perf_counter()
    runs = {
        "chib-dpm": chib_dpm(y, prior, g, seed=SEED),
        "rlr-sis": rlr_evidence(y, prior, g, adversarial="sis", seed=SEED),
        "rlr-prior": rlr_evidence(y, prior, g, adversarial="prior", seed=SEED),
    }
    elapsed = time.perf_counter() - t0
    parts, bad = [], []
    for name, est in runs.items():
        diff = est.log_evidence - exact
        parts.append(f"{name} {diff:+.4f}/{est.se_log:.4f}")
        if not abs(diff) < 0.1:
            bad.append(name)
    ok = not bad and elapsed < 120
    report(2, ok, f"exact {exact:.4f}; diff/se: " + ", ".join(parts) + f"; {elapsed:.1f}s")
    assert ok


def test_criterion_3_label_switching_bias(report):
    rng = np.random.default_rng(11)
    y = np.concatenate([rng.normal(m, 1.0, 30) for m in (-10.0, 0.0, 10.0)])
    prior = hyperparams_from_data(y)
    z0 = np.repeat(np.arange(3), 30)
    t0 = time.perf_counter()
    ch = run_fm_gibbs(y, 3, prior, 1.0, T=5000, burnin=500, rng=rng, z0=z0)
    gap = chib_permutation(y, 3, prior, 1.0, chain=ch).log_evidence - chib(y, 3, prior, 1.0, chain=ch).log_evidence
    elapsed = time.perf_counter() - t0
    ok = abs(gap - math.log(6)) <= 0.3 and elapsed < 60
    report(3, ok, f"chib-perm minus chib = {gap:.4f} (log 3! = {math.log(6):.4f}); {elapsed:.1f}s")
    assert ok


def test_criterion_4_partition_combinatorics(report):
    c = partitions_count(82, 8)
    galaxy_ok = f"{c:.2e}" == "2.80e+69"
    counts_ok = True
    for n in range(1, 11):
        for K in range(1, 5):
            # every allocation in {0..K-1}^n as base-K digits, reduced to label-free form
            Z = (np.arange(K**n)[:, None] // K ** np.arange(n)[None, :]) % K
            forms = np.unique(canonical_labels_batch(Z, K), axis=0)
            counts_ok &= forms.shape[0] == partitions_count(n, K)
    worst = 0.0
    for n in range(1, 9):
        for K in (1, 2, 3):
            for a in (0.5, 1.0, 2.0):
                tot = math.fsum(math.exp(log_partition_prior(z, [a] * K)) for z in set_partitions(n, K))
                worst = max(worst, abs(tot - 1.0))
    ok = galaxy_ok and counts_ok and worst <= 1e-10
    report(4, ok, f"S(82,<=8) = {c:.3e}; brute-force counts match: {counts_ok}; max |prior sum - 1| = {worst:.1e}")
    assert ok


@pytest.mark.slow
def test_criterion_5_galaxy_model_selection(report):
    y = ingest_dataset("galaxy") * GALAXY_SCALE
    prior = hyperparams_from_data(y)
    t0 = time.perf_counter()
    means = {}
    sds = {}
    for K, T in GALAXY_SIS_SCAN.items():
        vals = [sis_evidence(y, K, prior, 1.0, T=T, seed=replicate_seed(SEED, i)).log_evidence for i in range(20)]
        means[K], sds[K] = float(np.mean(vals)), float(np.std(vals, ddof=1))
    elapsed = time.perf_counter() - t0
    best = max(means, key=means.get)
    ok = best == 5 and elapsed <= 1800
    table = ", ".join(f"K={k}: {means[k]:.3f}" for k in sorted(means))
    report(5, ok, f"argmax K = {best}; {table}; sd(K=5) {sds[5]:.3f}; {elapsed:.0f}s")
    assert ok


@pytest.fixture(scope="module")
def replicates(fm_small):
    y, prior, _ = fm_small
    out = {"am": [], "sis": [], "smc": [], "chib-partition": []}
    for i in range(50):
        s = replicate_seed(SEED + 1, i)
        out["am"].append(arithmetic_mean(y, 2, prior, 1.0, T=10**5, seed=s))
        out["sis"].append(sis_evidence(y, 2, prior, 1.0, T=10**4, seed=s))
        out["smc"].append(smc_evidence(y, 2, prior, 1.0, N=2000, seed=s))
        out["chib-partition"].append(chib_partition(y, 2, prior, 1.0, T=10**4, burnin=1000, seed=s))
    return out


def test_criterion_6_linear_unbiasedness(fm_small, replicates, report):
    _, _, exact = fm_small
    parts, bad = [], []
    for name in ("am", "sis", "smc"):
        r = np.exp(np.array([e.log_evidence for e in replicates[name]]) - exact)
        se = r.std(ddof=1) / math.sqrt(r.size)
        z = (r.mean() - 1.0) / se
        parts.append(f"{name} mean ratio {r.mean():.4f} (z={z:+.2f})")
        if not abs(z) <= 3:
            bad.append(name)
    ok = not bad
    report(6, ok, "; ".join(parts))
    assert ok


def test_criterion_7_variance_reporting(replicates, report):
    parts, bad = [], []
    for name in ("sis", "chib-partition"):
        est = np.array([e.log_evidence for e in replicates[name]])
        se = np.array([e.se_log for e in replicates[name]])
        emp = est.std(ddof=1)
        ratio = float(np.median(se) / emp)
        parts.append(f"{name} median se {np.median(se):.4f} vs sd {emp:.4f} (x{ratio:.2f})")
        if not 0.5 <= ratio <= 2.0:
            bad.append(name)
    ok = not bad
    report(7, ok, "; ".join(parts))
    assert ok


@pytest.mark.slow
def test_criterion_8_bayes_factor_consistency(report, tmp_path):
    grid = [10, 25, 50, 100, 200]
    cfg = BFConfig(null=dict(NORMAL_NULL), grid=grid, datasets=50, seed=0, out=str(tmp_path / "bf.csv"))
    t0 = time.perf_counter()
    _, summary = bf_paths(cfg)
    elapsed = time.perf_counter() - t0
    frac = [summary[n]["fraction_positive"] for n in grid]
    monotone = all(b >= a for a, b in zip(frac, frac[1:]))
    ok = monotone and frac[-1] >= 0.9 and elapsed <= 1200
    mean_bf = ", ".join(f"{summary[n]['mean_log_bf']:+.2f}" for n in grid)
    report(8, ok, f"fraction log BF > 0 over n={grid}: {[round(f, 2) for f in frac]}; mean log BF {mean_bf}; "
                  f"{elapsed:.0f}s")
    assert ok


def test_criterion_9_exactness_kernels(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(SEED)
    worst_inc = 0.0
    for _ in range(200):
        prior = NIGPrior(rng.normal(), rng.uniform(0.05, 5), rng.uniform(0.5, 4), rng.uniform(0.1, 4))
        ys = rng.normal(0, 5, size=rng.integers(1, 40))
        s = ClusterSuffStats()
        tot = 0.0
        for v in ys:
            tot += predictive_log_ratio(s, v, prior)
            s = s.add(v)
        worst_inc = max(worst_inc, abs(tot - cluster_log_marginal(ClusterSuffStats.from_data(ys), prior)))
    quad_prior = NIGPrior(1.5, 0.5, 2.0, 0.7)
    quad_err = abs(cluster_log_marginal(ClusterSuffStats.from_data([1.0, 2.0, 2.5]), quad_prior)
                   - quad_marginal([1.0, 2.0, 2.5], quad_prior))
    worst_urn = 0.0
    for _ in range(500):
        z = canonical_labels(rng.integers(0, 6, size=rng.integers(1, 30)))
        M = rng.gamma(2.0, 1.0)
        worst_urn = max(worst_urn, abs(dpm_log_prior_z(z, M) - sequential_urn_log_prob(z, M)))
    rho, T = 0.5, 10**5
    x = ar1(T, rho, np.random.default_rng(1))
    target = (1.0 / (1 - rho**2)) * (1 + rho) / (1 - rho) / T
    nw_rel = abs(newey_west_variance(x) / target - 1.0)
    elapsed = time.perf_counter() - t0
    ok = worst_inc <= 1e-10 and quad_err <= 1e-5 and worst_urn <= 1e-12 and nw_rel <= 0.10 and elapsed < 30
    report(9, ok, f"incremental {worst_inc:.1e}, quadrature {quad_err:.1e}, urn {worst_urn:.1e}, "
                  f"Newey-West rel. err {nw_rel:.3f}; {elapsed:.1f}s")
    assert ok
