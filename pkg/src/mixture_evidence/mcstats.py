"""Monte Carlo summary statistics used across the estimators.

All reductions operate in the log domain where the quantities involved
(likelihoods, importance weights) span hundreds of orders of magnitude.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import logsumexp

from .exceptions import InvalidInputError


def log_mean_exp(logw) -> float:
    """log of the arithmetic mean of ``exp(logw)``, computed stably."""
    logw = np.asarray(logw, dtype=float).ravel()
    if logw.size == 0:
        raise InvalidInputError("log_mean_exp of an empty array")
    if logw.size == 1:
        return float(logw[0])
    return float(logsumexp(logw) - math.log(logw.size))


def log_mean_exp_se(logw) -> float:
    """Delta-method standard error of ``log(mean(w))`` for i.i.d. weights.

    Returns ``sd(w) / (sqrt(T) * mean(w))`` evaluated without leaving the
    log domain more than necessary.
    """
    logw = np.asarray(logw, dtype=float).ravel()
    T = logw.size
    if T < 2:
        return 0.0
    lm = log_mean_exp(logw)
    if not np.isfinite(lm):
        return math.inf
    r = np.exp(logw - lm)  # w / mean(w)
    return float(np.std(r, ddof=1) / math.sqrt(T))


def newey_west_variance(series, q: int | None = None) -> float:
    """Bartlett-kernel (Newey-West) variance of the mean of ``series``.

    V = (1/T) * (g0 + 2 * sum_{s=1..q} (1 - s/(q+1)) * g_s)

    with ``g_s`` the lag-``s`` autocovariance about the sample mean
    (normalised by ``T``). ``q=None`` uses ``floor(T ** (1/3))``.
    """
    x = np.asarray(series, dtype=float).ravel()
    T = x.size
    if T == 0:
        raise InvalidInputError("newey_west_variance of an empty series")
    if q is None:
        q = int(math.floor(T ** (1.0 / 3.0)))
    q = int(q)
    if q < 0:
        raise InvalidInputError("lag q must be nonnegative")
    q = min(q, T - 1)
    d = x - x.mean()
    g0 = float(np.dot(d, d)) / T
    v = g0
    for s in range(1, q + 1):
        gs = float(np.dot(d[s:], d[:-s])) / T
        v += 2.0 * (1.0 - s / (q + 1.0)) * gs
    # Bartlett weights give a positive semidefinite estimate; only round-off can go negative.
    assert v >= -1e-9 * g0
    return max(v, 0.0) / T


def delta_method_se_log(p_hat: float, var_p: float) -> float:
    """Standard error of ``log(p_hat)`` given the variance of ``p_hat``."""
    if not p_hat > 0:
        raise InvalidInputError(f"p_hat must be positive, got {p_hat}")
    if var_p < 0:
        raise InvalidInputError("variance must be nonnegative")
    return math.sqrt(var_p) / p_hat


def ess_batch_means(chain) -> float:
    """Effective sample size from batch means with ``floor(sqrt(T))`` batches.

    ESS = T * Var_iid / Var_bm, clamped to ``[1, T]``.
    """
    x = np.asarray(chain, dtype=float).ravel()
    T = x.size
    if T < 16:
        raise InvalidInputError(f"chain too short for batch means (T={T} < 16)")
    var_iid = float(np.var(x, ddof=1))
    if var_iid == 0.0:
        return float(T)
    n_batches = int(math.isqrt(T))
    size = T // n_batches
    means = x[: n_batches * size].reshape(n_batches, size).mean(axis=1)
    var_bm = size * float(np.var(means, ddof=1))
    if var_bm <= 0.0:
        return float(T)
    return float(min(max(T * var_iid / var_bm, 1.0), T))


def bridge_log_relative_error(
    logr_proposal, logr_target, s_proposal: float, s_target: float, n_target_eff: float
) -> float:
    """Approximate standard error of a log bridge-sampling estimate.

    ``logr_*`` are ``log(p_tilde / (c * q))`` evaluated at the converged
    normaliser ``c`` on draws from the proposal ``q`` and from the target
    respectively. ``s_*`` are the sample-size fractions entering the optimal
    bridge function. The squared relative error is

        Var_q(a) / (N_q E_q[a]^2) + Var_p(b) / (N_p* E_p[b]^2)

    with ``a = r / (s_q + s_p r)`` and ``b = 1 / (s_q + s_p r)``, and
    ``N_p*`` the effective size of the (autocorrelated) target sample.
    """
    l1 = np.asarray(logr_proposal, dtype=float)
    l2 = np.asarray(logr_target, dtype=float)
    log_sq, log_sp = math.log(s_proposal), math.log(s_target)
    # a = r / (s_q + s_p r) = 1 / (s_q / r + s_p), bounded by 1 / s_p
    a = np.exp(-np.logaddexp(log_sq - l1, log_sp))
    b = np.exp(-np.logaddexp(log_sq, log_sp + l2))
    re2 = 0.0
    if l1.size > 1 and a.mean() > 0:
        re2 += np.var(a, ddof=1) / (l1.size * a.mean() ** 2)
    if l2.size > 1 and b.mean() > 0:
        re2 += np.var(b, ddof=1) / (max(n_target_eff, 1.0) * b.mean() ** 2)
    return float(math.sqrt(re2))
