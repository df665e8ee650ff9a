import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from mixture_evidence.conjugate import (
    ClusterSuffStats,
    NIGPrior,
    cluster_log_marginal,
    hyperparams_from_data,
    log_marginal_array,
    log_predictive_array,
    nb_log_marginal,
    nb_log_predictive,
    predictive_log_ratio,
)
from mixture_evidence.exceptions import DegenerateDataError, InvalidInputError


def quad_marginal(y, prior):
    """Brute-force 2-D integral of prod N(y_i | mu, s2) against the NIG prior."""
    y = np.asarray(y, float)
    # integrate over the precision tau = 1 / sigma^2, whose Gamma(a0, rate b0) tail is light
    gam = stats.gamma(prior.a0, scale=1.0 / prior.b0)
    ys = [float(v) for v in y]
    log_gnorm = prior.a0 * math.log(prior.b0) - math.lgamma(prior.a0)

    def integrand(mu, tau):
        if tau <= 0.0:
            return 0.0
        lt = math.log(tau)
        lp = 0.5 * (lt + math.log(prior.lambda0) - math.log(2 * math.pi)) - 0.5 * prior.lambda0 * tau * (mu - prior.mu0) ** 2
        for v in ys:
            lp += 0.5 * (lt - math.log(2 * math.pi)) - 0.5 * tau * (v - mu) ** 2
        lp += log_gnorm + (prior.a0 - 1.0) * lt - prior.b0 * tau
        return math.exp(lp)

    def width(tau):
        return 12.0 / math.sqrt(prior.lambda0 * tau) + np.max(np.abs(y - prior.mu0))

    val, _ = integrate.dblquad(
        integrand, 0.0, gam.isf(1e-14),
        lambda t: prior.mu0 - width(t), lambda t: prior.mu0 + width(t),
        epsabs=1e-12, epsrel=1e-9,
    )
    return math.log(val)


def test_empty_cluster_is_zero(unit_prior):
    assert cluster_log_marginal(ClusterSuffStats(), unit_prior) == 0.0


def test_single_point_student_t(unit_prior):
    v = cluster_log_marginal(ClusterSuffStats.from_data([0.0]), unit_prior)
    assert v == pytest.approx(math.log(0.25), abs=1e-12)
    # Student-t with 2 dof and scale sqrt(2) at zero
    assert v == pytest.approx(stats.t.logpdf(0.0, df=2, scale=math.sqrt(2.0)), abs=1e-12)
    assert v == pytest.approx(quad_marginal([0.0], unit_prior), abs=1e-6)


@pytest.mark.parametrize(
    "y,prior",
    [
        ([0.3, -1.2], NIGPrior(0.0, 1.0, 1.0, 1.0)),
        ([1.0, 2.0, 2.5], NIGPrior(1.5, 0.5, 2.0, 0.7)),
        ([-0.4], NIGPrior(0.2, 3.0, 1.28, 0.36)),
    ],
)
def test_matches_quadrature(y, prior):
    assert cluster_log_marginal(ClusterSuffStats.from_data(y), prior) == pytest.approx(quad_marginal(y, prior), abs=1e-5)


@settings(max_examples=60, deadline=None)
@given(
    ys=st.lists(st.floats(-20, 20, allow_nan=False), min_size=1, max_size=50),
    mu0=st.floats(-5, 5),
    lam0=st.floats(0.01, 10),
    a0=st.floats(0.5, 5),
    b0=st.floats(0.05, 10),
)
def test_incremental_equals_batch(ys, mu0, lam0, a0, b0):
    prior = NIGPrior(mu0, lam0, a0, b0)
    batch = cluster_log_marginal(ClusterSuffStats.from_data(ys), prior)
    s = ClusterSuffStats()
    total = 0.0
    for y in ys:
        total += predictive_log_ratio(s, y, prior)
        s = s.add(y)
    assert total == pytest.approx(batch, abs=1e-10, rel=1e-12)
    # exchangeability through shuffled insertion order
    rev = 0.0
    s = ClusterSuffStats()
    for y in reversed(ys):
        rev += predictive_log_ratio(s, y, prior)
        s = s.add(y)
    assert rev == pytest.approx(batch, abs=1e-10, rel=1e-12)


def test_predictive_ratio_is_difference(unit_prior):
    rng = np.random.default_rng(0)
    ys = rng.normal(size=7)
    s = ClusterSuffStats.from_data(ys)
    for y in (-3.0, 0.1, 2.2):
        diff = cluster_log_marginal(s.add(y), unit_prior) - cluster_log_marginal(s, unit_prior)
        assert predictive_log_ratio(s, y, unit_prior) == pytest.approx(diff, abs=1e-12)


def test_predictive_empty_equals_single_point(unit_prior):
    assert predictive_log_ratio(ClusterSuffStats(), 0.0, unit_prior) == pytest.approx(math.log(0.25), abs=1e-12)


def test_predictive_integrates_to_one(unit_prior):
    s = ClusterSuffStats.from_data([0.5, -0.2, 1.1])
    val, _ = integrate.quad(lambda y: math.exp(predictive_log_ratio(s, y, unit_prior)), -50, 50, limit=200)
    assert val == pytest.approx(1.0, abs=1e-4)


def test_remove_undoes_add(unit_prior):
    s = ClusterSuffStats.from_data([1.0, 2.0])
    assert s.add(3.0).remove(3.0) == s
    assert ClusterSuffStats.from_data([4.0]).remove(4.0) == ClusterSuffStats()


def test_vectorised_and_compiled_agree(unit_prior):
    rng = np.random.default_rng(3)
    prior = NIGPrior(0.4, 0.7, 1.5, 0.9)
    for n in range(0, 6):
        ys = rng.normal(size=n)
        s = ClusterSuffStats.from_data(ys)
        ref = cluster_log_marginal(s, prior)
        assert log_marginal_array(s.n, s.sum, s.sumsq, prior) == pytest.approx(ref, abs=1e-12)
        assert nb_log_marginal(s.n, s.sum, s.sumsq, *prior.as_tuple()) == pytest.approx(ref, abs=1e-12)
        pr = predictive_log_ratio(s, 0.3, prior)
        assert log_predictive_array(s.n, s.sum, s.sumsq, 0.3, prior) == pytest.approx(pr, abs=1e-12)
        assert nb_log_predictive(s.n, s.sum, s.sumsq, 0.3, *prior.as_tuple()) == pytest.approx(pr, abs=1e-12)


def test_raw_scale_sums_are_stable():
    # galaxy-like magnitudes: a tight cluster far from zero
    ys = 20000.0 + np.array([0.1, -0.2, 0.05, 0.3])
    s = ClusterSuffStats.from_data(ys)
    shifted = ClusterSuffStats.from_data(ys - 20000.0)
    assert s.sumsq - s.sum**2 / s.n == pytest.approx(shifted.sumsq - shifted.sum**2 / shifted.n, rel=1e-6)


def test_hyperparams_rule():
    p = hyperparams_from_data([-1.0, 1.0])
    assert (p.mu0, p.a0, p.b0, p.lambda0) == (0.0, 1.28, pytest.approx(0.36), pytest.approx(1.3))


def test_hyperparams_scale():
    y = np.array([1000.0, 3000.0, 2000.0])
    assert hyperparams_from_data(y, scale=1e-3) == hyperparams_from_data(y * 1e-3)


def test_hyperparams_constant_data_rejected():
    with pytest.raises(DegenerateDataError):
        hyperparams_from_data([0.0, 0.0, 0.0])


def test_invalid_inputs():
    with pytest.raises(InvalidInputError):
        NIGPrior(0.0, -1.0, 1.0, 1.0)
    with pytest.raises(InvalidInputError):
        ClusterSuffStats(0, 1.0, 0.0)
    with pytest.raises(InvalidInputError):
        ClusterSuffStats(1, float("inf"), 1.0)
    with pytest.raises(InvalidInputError):
        predictive_log_ratio(ClusterSuffStats(), float("nan"), NIGPrior(0, 1, 1, 1))
