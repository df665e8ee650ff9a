import math

import numpy as np
import pytest

from mixture_evidence.conjugate import ClusterSuffStats, NIGPrior, cluster_log_marginal
from mixture_evidence.exceptions import (
    DegenerateEstimateError,
    GuardError,
    InsufficientOccupancyError,
    InvalidInputError,
)
from mixture_evidence.fm_core import run_fm_gibbs
from mixture_evidence.fm_evidence import (
    FM_ESTIMATORS,
    EvidenceEstimate,
    bridge_sampling,
    chib,
    chib_partition,
    chib_partition_from_allocations,
    chib_permutation,
    run_fm_estimator,
    sis_evidence,
    smc_evidence,
)
from mixture_evidence.oracle import fm_exact_evidence

PRIOR = NIGPrior(0.0, 0.5, 2.0, 1.0)


def one_cluster_exact(y, prior):
    return cluster_log_marginal(ClusterSuffStats.from_data(y), prior)


@pytest.mark.parametrize("name", FM_ESTIMATORS)
def test_empty_data_gives_zero(name):
    tuning = {"T": 200, "burnin": 10} if name not in ("am", "sis", "smc", "bridge") else {}
    if name == "bridge":
        tuning = {"T0": 5, "T1": 200, "T2": 200, "burnin": 10}
    if name == "smc":
        tuning = {"N": 200}
    if name == "am":
        tuning = {"T": 100}
    if name == "sis":
        tuning = {"T": 10}
    if name == "chib-partition":
        # the single empty partition is visited on every sweep
        tuning = {"T": 200, "burnin": 0}
    est = run_fm_estimator(name, [], 2, PRIOR, 1.0, seed=0, **tuning)
    assert est.log_evidence == pytest.approx(0.0, abs=1e-10)


def test_single_component_chib_equals_permutation_version():
    y = np.random.default_rng(1).normal(size=10)
    ch = run_fm_gibbs(y, 1, PRIOR, 1.0, T=300, burnin=10, rng=np.random.default_rng(2))
    a = chib(y, 1, PRIOR, 1.0, chain=ch)
    b = chib_permutation(y, 1, PRIOR, 1.0, chain=ch, mode="full")
    assert a.log_evidence == b.log_evidence
    # K = 1: the ordinate is exact for every draw, so Chib's identity is exact
    assert a.log_evidence == pytest.approx(one_cluster_exact(y, PRIOR), abs=1e-10)


def test_random_permutations_enumerate_when_r_exceeds_k_factorial(fm_instance):
    y, prior = fm_instance
    ch = run_fm_gibbs(y, 3, prior, 1.0, T=500, burnin=50, rng=np.random.default_rng(3))
    full = chib_permutation(y, 3, prior, 1.0, chain=ch, mode="full")
    rand = chib_permutation(y, 3, prior, 1.0, chain=ch, mode="random", R=6, seed=9)
    assert rand.log_evidence == pytest.approx(full.log_evidence, abs=1e-12)
    assert rand.tuning["n_perms"] == 6


def test_single_component_bridge_is_exact_from_any_start():
    y = np.random.default_rng(4).normal(size=15)
    exact = one_cluster_exact(y, PRIOR)
    for init in (exact - 5.0, exact + 3.0, None):
        est = bridge_sampling(y, 1, PRIOR, 1.0, T0=5, T1=300, T2=300, burnin=10, seed=1, init_log_evidence=init)
        assert est.log_evidence == pytest.approx(exact, abs=1e-8)


def test_single_observation_sis_is_exact():
    prior = NIGPrior(0.3, 1.2, 1.5, 0.8)
    est = sis_evidence([1.7], 4, prior, 1.0, T=50, seed=0)
    assert est.log_evidence == pytest.approx(one_cluster_exact([1.7], prior), abs=1e-12)
    assert est.se_log == pytest.approx(0.0, abs=1e-12)


def test_sis_single_component_is_exact():
    y = np.random.default_rng(5).normal(size=12)
    est = sis_evidence(y, 1, PRIOR, 1.0, T=20, seed=0)
    assert est.log_evidence == pytest.approx(one_cluster_exact(y, PRIOR), abs=1e-10)


def test_smc_schedule_and_single_component_accuracy():
    y = np.random.default_rng(6).normal(size=20)
    est = smc_evidence(y, 1, PRIOR, 1.0, N=2000, M_moves=5, seed=0)
    temps = est.tuning["temperatures"]
    assert temps[0] == 0.0 and temps[-1] == 1.0
    assert np.all(np.diff(temps) > 0)
    assert 0.0 < est.tuning["mean_acceptance"] < 1.0
    exact = one_cluster_exact(y, PRIOR)
    assert abs(est.log_evidence - exact) < 4 * est.se_log + 0.02


def test_smc_rejects_bad_tuning():
    with pytest.raises(InvalidInputError):
        smc_evidence([0.0, 1.0], 2, PRIOR, 1.0, N=10)
    with pytest.raises(InvalidInputError):
        smc_evidence([0.0, 1.0], 2, PRIOR, 1.0, ess_target=1.5)


def test_partition_estimator_ignores_labels(fm_instance):
    y, prior = fm_instance
    ch = run_fm_gibbs(y, 2, prior, 1.0, T=3000, burnin=100, rng=np.random.default_rng(7))
    base = chib_partition_from_allocations(ch.z, y, 2, prior, 1.0)
    flipped = ch.z.copy()
    flip = np.random.default_rng(8).random(len(flipped)) < 0.5
    flipped[flip] = 1 - flipped[flip]
    other = chib_partition_from_allocations(flipped, y, 2, prior, 1.0)
    assert other[0] == pytest.approx(base[0], abs=1e-12)
    assert other[2]["hits"] == base[2]["hits"]


def test_partition_estimator_needs_visits():
    y = np.arange(6.0)
    Z = np.array([[0, 0, 0, 1, 1, 1], [0, 1, 0, 1, 0, 1]] * 4)
    with pytest.raises(InsufficientOccupancyError):
        chib_partition_from_allocations(Z, y, 2, PRIOR, 1.0)
    with pytest.raises(InvalidInputError):
        chib_partition_from_allocations(Z, y, 2, PRIOR, [1.0, 2.0])


def test_partition_estimator_exact_when_chain_is_exact(fm_instance):
    # feed the exact posterior frequencies: the estimate must equal the evidence
    from mixture_evidence.oracle import fm_exact_partition_posterior

    y, prior = fm_instance
    post = fm_exact_partition_posterior(y, 2, prior, 1.0)
    ranked = sorted(post, key=post.get, reverse=True)
    best, filler = ranked[0], ranked[-1]
    m = 100_000
    hits = round(post[best] * m)
    Z = np.array([best] * hits + [filler] * (m - hits))
    est, _, info = chib_partition_from_allocations(Z, y, 2, prior, 1.0)
    assert info["partition"] == list(best)
    assert est == pytest.approx(fm_exact_evidence(y, 2, prior, 1.0), abs=2e-5)


def test_guards():
    y = np.arange(10.0)
    with pytest.raises(GuardError):
        chib_permutation(y, 7, PRIOR, 1.0, T=100, burnin=0, mode="full")
    with pytest.raises(GuardError):
        bridge_sampling(y, 7, PRIOR, 1.0)
    with pytest.raises(InvalidInputError):
        chib(y, 2, PRIOR, 1.0, T=10)
    with pytest.raises(InvalidInputError):
        run_fm_estimator("nope", y, 2, PRIOR, 1.0)
    with pytest.raises(InvalidInputError):
        sis_evidence([0.0, np.nan], 2, PRIOR, 1.0)
    with pytest.raises(DegenerateEstimateError):
        EvidenceEstimate(float("-inf"), None, "x")


def test_seed_reproducibility(fm_instance):
    y, prior = fm_instance
    for name, tuning in [("sis", {"T": 500}), ("chib", {"T": 300, "burnin": 10}), ("smc", {"N": 300, "M_moves": 2})]:
        a = run_fm_estimator(name, y, 2, prior, 1.0, seed=11, **tuning)
        b = run_fm_estimator(name, y, 2, prior, 1.0, seed=11, **tuning)
        assert a.log_evidence == b.log_evidence


@pytest.mark.parametrize(
    "name,tuning,extra",
    [
        ("am", {"T": 200_000}, 0.0),
        ("sis", {"T": 20_000}, 0.0),
        ("chib-perm", {"T": 5000, "burnin": 500}, 0.0),
        ("chib-partition", {"T": 20_000, "burnin": 500}, 0.0),
        ("bridge", {"T0": 20, "T1": 2000, "T2": 2000, "burnin": 500}, 0.0),
        ("smc", {"N": 2000, "M_moves": 5}, 0.02),
    ],
)
def test_agreement_with_enumeration(fm_instance, name, tuning, extra):
    y, prior = fm_instance
    exact = fm_exact_evidence(y, 2, prior, 1.0)
    est = run_fm_estimator(name, y, 2, prior, 1.0, seed=123, **tuning)
    assert abs(est.log_evidence - exact) < 4 * est.se_log + extra + 1e-3


def test_chib_undercorrects_on_a_stuck_chain():
    # with well separated clusters the Gibbs sampler never switches labels, so
    # Chib's estimate misses the log K! symmetry term while the permutation
    # average restores it
    rng = np.random.default_rng(11)
    y = np.concatenate([rng.normal(m, 1.0, 30) for m in (-10.0, 0.0, 10.0)])
    prior = NIGPrior(0.0, 0.05, 2.0, 1.0)
    z0 = np.repeat(np.arange(3), 30)
    ch = run_fm_gibbs(y, 3, prior, 1.0, T=2000, burnin=200, rng=rng, z0=z0)
    assert len({tuple(np.unique(r)) for r in ch.z}) == 1 and np.all(ch.z[:, 0] == 0)
    plain = chib(y, 3, prior, 1.0, chain=ch).log_evidence
    perm = chib_permutation(y, 3, prior, 1.0, chain=ch).log_evidence
    assert perm - plain == pytest.approx(math.log(6), abs=0.05)
    ref = chib_partition(y, 3, prior, 1.0, chain=ch).log_evidence
    assert perm == pytest.approx(ref, abs=0.05)


def test_bridge_small_instance_and_fixed_point(tiny_fm_instance):
    y, prior = tiny_fm_instance
    exact = fm_exact_evidence(y, 2, prior, 1.0)
    tuning = dict(T0=20, T1=2000, T2=2000, burnin=500, seed=21)
    est = bridge_sampling(y, 2, prior, 1.0, **tuning)
    assert abs(est.log_evidence - exact) < 0.05
    started_at_truth = bridge_sampling(y, 2, prior, 1.0, init_log_evidence=exact, **tuning)
    assert abs(started_at_truth.log_evidence - exact) < 0.05
    # the recursion has a unique fixed point, so the start does not matter
    assert started_at_truth.log_evidence == pytest.approx(est.log_evidence, abs=1e-8)
