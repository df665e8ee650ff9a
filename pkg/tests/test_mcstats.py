import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mixture_evidence.exceptions import InvalidInputError
from mixture_evidence.mcstats import (
    bridge_log_relative_error,
    delta_method_se_log,
    ess_batch_means,
    log_mean_exp,
    log_mean_exp_se,
    newey_west_variance,
)


def ar1(T, rho, rng):
    e = rng.standard_normal(T)
    x = np.empty(T)
    x[0] = e[0] / math.sqrt(1 - rho**2)
    for t in range(1, T):
        x[t] = rho * x[t - 1] + e[t]
    return x


def test_newey_west_iid_bernoulli_q0():
    rng = np.random.default_rng(0)
    x = (rng.random(1000) < 0.3).astype(float)
    p = x.mean()
    assert newey_west_variance(x, 0) == pytest.approx(p * (1 - p) / x.size, rel=1e-12)


def test_newey_west_ar1_long_run_variance():
    rng = np.random.default_rng(1)
    rho, T = 0.5, 10**5
    x = ar1(T, rho, rng)
    sigma2 = 1.0 / (1 - rho**2)
    target = sigma2 * (1 + rho) / (1 - rho) / T
    assert newey_west_variance(x) == pytest.approx(target, rel=0.10)


def test_newey_west_constant_is_zero():
    assert newey_west_variance(np.full(50, 3.2)) == pytest.approx(0.0, abs=1e-28)
    assert newey_west_variance(np.full(50, 0.5)) == 0.0


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=200), st.integers(0, 300))
def test_newey_west_nonnegative(xs, q):
    assert newey_west_variance(xs, q) >= 0.0


def test_newey_west_empty():
    with pytest.raises(InvalidInputError):
        newey_west_variance([])


def test_delta_method():
    assert delta_method_se_log(1.0, 0.04) == pytest.approx(0.2)
    assert delta_method_se_log(0.5, 0.01) == pytest.approx(0.2)
    with pytest.raises(InvalidInputError):
        delta_method_se_log(0.0, 0.1)


def test_ess_iid():
    x = np.random.default_rng(2).standard_normal(10**4)
    assert 0.8e4 <= ess_batch_means(x) <= 1.2e4


def test_ess_sticky_chain():
    x = np.repeat(np.random.default_rng(3).standard_normal(500), 20)
    assert ess_batch_means(x) < x.size / 2


def test_ess_clamped_and_short():
    x = np.tile([1.0, -1.0], 500)  # anti-correlated: raw ratio would exceed T
    assert ess_batch_means(x) <= x.size
    with pytest.raises(InvalidInputError):
        ess_batch_means(np.arange(10.0))


def test_log_mean_exp():
    assert log_mean_exp([3.5]) == 3.5
    w = np.array([-1000.0, -1001.0, -999.0])
    assert log_mean_exp(w) == pytest.approx(-1000 + math.log((1 + math.exp(-1) + math.exp(1)) / 3))
    assert log_mean_exp_se([2.0]) == 0.0
    rng = np.random.default_rng(4)
    lw = rng.normal(size=1000)
    w = np.exp(lw)
    assert log_mean_exp_se(lw) == pytest.approx(w.std(ddof=1) / math.sqrt(w.size) / w.mean(), rel=1e-10)


def test_bridge_relative_error_zero_for_exact_ratio():
    # if p_tilde / (c q) == 1 everywhere, the bridge estimate has no variance
    assert bridge_log_relative_error(np.zeros(100), np.zeros(100), 0.5, 0.5, 100) == 0.0
