"""Evidence estimators for conjugate finite Gaussian mixtures.

Every estimator takes ``(data, K, prior, alpha)`` plus its own tuning keywords
and a ``seed`` (int, SeedSequence or Generator), and returns an
:class:`EvidenceEstimate` on the log scale.

Estimators that consume a Gibbs chain also accept a precomputed ``chain`` so
several of them can share one run.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .conjugate import LOG_2PI, NIGPrior, log_marginal_array, log_predictive_array, posterior_params_array
from .exceptions import (
    ConvergenceError,
    DegeneracyError,
    DegenerateEstimateError,
    GuardError,
    InsufficientOccupancyError,
    InvalidInputError,
)
from .fm_core import (
    FMChain,
    FMParams,
    _as_alpha,
    all_permutations,
    allocation_stats,
    fm_log_prior,
    fm_sample_prior,
    mixture_log_likelihood,
    ordinate_from_stats,
    run_fm_gibbs,
)
from .mcstats import (
    bridge_log_relative_error,
    delta_method_se_log,
    ess_batch_means,
    log_mean_exp,
    log_mean_exp_se,
    newey_west_variance,
)
from .partitions import canonical_labels_batch

MAX_PERMUTATION_K = 6

FM_ESTIMATORS = ("am", "hm", "chib", "chib-perm", "chib-randperm", "chib-partition", "bridge", "smc", "sis")


@dataclass
class EvidenceEstimate:
    log_evidence: float
    se_log: float | None
    estimator: str
    tuning: dict = field(default_factory=dict)
    wall_time: float = 0.0

    def __post_init__(self):
        self.log_evidence = float(self.log_evidence)
        if not math.isfinite(self.log_evidence):
            raise DegenerateEstimateError(f"{self.estimator}: non-finite log evidence {self.log_evidence}")
        if self.se_log is not None:
            self.se_log = float(self.se_log)
            if not self.se_log >= 0:
                raise DegenerateEstimateError(f"{self.estimator}: invalid standard error {self.se_log}")


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def _data(data) -> np.ndarray:
    y = np.asarray(data, dtype=float).ravel()
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("data must be finite")
    return y


def _ratio_se(log_terms) -> float:
    """Newey-West + delta-method s.e. of log(mean(exp(log_terms))) for a correlated series."""
    log_terms = np.asarray(log_terms, dtype=float)
    r = np.exp(log_terms - np.max(log_terms))
    return delta_method_se_log(float(r.mean()), newey_west_variance(r))


# ---------------------------------------------------------------------------
# simple Monte Carlo


def arithmetic_mean(data, K: int, prior: NIGPrior, alpha, T: int = 10**5, seed=None, chunk: int = 50000):
    """Prior-sampling estimator: log of the mean likelihood over T prior draws."""
    t0 = time.perf_counter()
    y = _data(data)
    alpha = _as_alpha(alpha, K)
    if T < 1:
        raise InvalidInputError("T must be at least 1")
    tuning = {"T": int(T)}
    if y.size == 0:
        return EvidenceEstimate(0.0, 0.0, "am", tuning, time.perf_counter() - t0)
    rng = _rng(seed)
    ll = np.empty(T)
    for start in range(0, T, chunk):
        m = min(chunk, T - start)
        mu, s2, w = fm_sample_prior(K, prior, alpha, rng, size=m)
        ll[start : start + m] = mixture_log_likelihood(mu, s2, w, y)
    return EvidenceEstimate(log_mean_exp(ll), log_mean_exp_se(ll), "am", tuning, time.perf_counter() - t0)


def _get_chain(chain, y, K, prior, alpha, T, burnin, rng, z0=None) -> FMChain:
    if chain is not None:
        return chain
    if T < 100:
        raise InvalidInputError("at least 100 post-burn-in iterations are required")
    return run_fm_gibbs(y, K, prior, alpha, T, burnin, rng, z0=z0)


def harmonic_mean(data, K: int, prior: NIGPrior, alpha, T: int = 10**4, burnin: int = 1000, seed=None, chain=None):
    """Posterior harmonic mean of the likelihood (known to be unstable; kept for comparison)."""
    t0 = time.perf_counter()
    y = _data(data)
    alpha = _as_alpha(alpha, K)
    if y.size == 0:
        return EvidenceEstimate(0.0, 0.0, "hm", {"T": int(T), "burnin": int(burnin)}, time.perf_counter() - t0)
    chain = _get_chain(chain, y, K, prior, alpha, T, burnin, _rng(seed))
    neg = -chain.loglik
    tuning = {"T": len(chain), "burnin": chain.meta.get("burnin", burnin)}
    return EvidenceEstimate(-log_mean_exp(neg), _ratio_se(neg), "hm", tuning, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# Chib-type estimators


def _chib_point(chain: FMChain, y, prior, alpha):
    t_star = int(np.argmax(chain.log_augmented))
    params0 = chain.params(t_star)
    log_joint = float(mixture_log_likelihood(params0.mu, params0.sigma2, params0.weights, y)) + float(
        fm_log_prior(params0.mu, params0.sigma2, params0.weights, prior, alpha)
    )
    return t_star, params0, log_joint


def _permuted_ordinates(params0: FMParams, stats, perms, prior, alpha) -> np.ndarray:
    """(T,) log of the ordinate averaged over the given label permutations."""
    counts, sums, sumsq = stats
    out = np.empty((len(perms), counts.shape[0]))
    for j, p in enumerate(perms):
        out[j] = ordinate_from_stats(params0, counts[:, p], sums[:, p], sumsq[:, p], prior, alpha)
    return logsumexp(out, axis=0) - math.log(len(perms))


def _chib_from_chain(chain, y, K, prior, alpha, perms, q_lag=None):
    _, params0, log_joint = _chib_point(chain, y, prior, alpha)
    stats = allocation_stats(chain.z, y, K)
    ords = _permuted_ordinates(params0, stats, perms, prior, alpha)
    log_ord = log_mean_exp(ords)
    if not np.isfinite(log_ord):
        raise DegenerateEstimateError("posterior ordinate estimate is zero at the selected point")
    r = np.exp(ords - np.max(ords))
    se = delta_method_se_log(float(r.mean()), newey_west_variance(r, q_lag))
    return log_joint - log_ord, se


def chib(data, K: int, prior: NIGPrior, alpha, T: int = 10**4, burnin: int = 1000, seed=None, chain=None, z0=None,
         q_lag=None):
    """Candidate's formula at the best visited point with a Rao-Blackwellised ordinate.

    No correction for label switching: when the sampler stays in one of the
    K! symmetric modes the estimate is too low by up to log K!.
    """
    t0 = time.perf_counter()
    y = _data(data)
    alpha = _as_alpha(alpha, K)
    chain = _get_chain(chain, y, K, prior, alpha, T, burnin, _rng(seed), z0)
    est, se = _chib_from_chain(chain, y, K, prior, alpha, np.arange(K)[None, :], q_lag)
    tuning = {"T": len(chain), "burnin": chain.meta.get("burnin", burnin)}
    return EvidenceEstimate(est, se, "chib", tuning, time.perf_counter() - t0)


def chib_permutation(data, K: int, prior: NIGPrior, alpha, T: int = 10**4, burnin: int = 1000, seed=None,
                     mode: str = "full", R: int = 100, chain=None, z0=None, q_lag=None):
    """Chib's estimator with the ordinate symmetrised over label permutations.

    ``mode="full"`` averages over all K! permutations (refused for K > 6);
    ``mode="random"`` over R random permutations, or over all of them when
    R >= K!.
    """
    t0 = time.perf_counter()
    y = _data(data)
    alpha = _as_alpha(alpha, K)
    rng = _rng(seed)
    if mode == "full":
        if K > MAX_PERMUTATION_K:
            raise GuardError(
                f"full permutation averaging costs O(T * K!) ordinates; K={K} gives {math.factorial(K)} "
                f"per iteration (limit K <= {MAX_PERMUTATION_K}); use mode='random'"
            )
        perms = all_permutations(K)
        name = "chib-perm"
    elif mode == "random":
        if R < 1:
            raise InvalidInputError("R must be at least 1")
        name = "chib-randperm"
        perms = None
        if K <= 10 and R >= math.factorial(K):
            perms = all_permutations(K)
    else:
        raise InvalidInputError(f"unknown mode {mode!r}")
    chain = _get_chain(chain, y, K, prior, alpha, T, burnin, rng, z0)
    if perms is None:
        perms = np.array([rng.permutation(K) for _ in range(R)])
    est, se = _chib_from_chain(chain, y, K, prior, alpha, perms, q_lag)
    tuning = {"T": len(chain), "burnin": chain.meta.get("burnin", burnin), "n_perms": int(len(perms))}
    return EvidenceEstimate(est, se, name, tuning, time.perf_counter() - t0)


def _log_partition_prior_rows(counts, alpha_sym: float, K: int):
    n = counts.sum(axis=1)
    k_plus = (counts > 0).sum(axis=1)
    return (
        gammaln(K + 1.0)
        - gammaln(K - k_plus + 1.0)
        + gammaln(K * alpha_sym)
        - gammaln(K * alpha_sym + n)
        + np.sum(np.where(counts > 0, gammaln(counts + alpha_sym) - gammaln(alpha_sym), 0.0), axis=1)
    )


def chib_partition_from_allocations(Z, data, K: int, prior: NIGPrior, alpha, q_lag=None, min_hits: int = 10):
    """Partition-level identity evaluated at the best visited partition.

    Returns ``(log_evidence, se_log, info)``. Label permutations of the same
    allocation are counted as the same partition.
    """
    y = _data(data)
    alpha = _as_alpha(alpha, K)
    if not np.all(alpha == alpha[0]):
        raise InvalidInputError("the partition prior needs a symmetric Dirichlet")
    Z = np.asarray(Z, dtype=np.int64)
    C = canonical_labels_batch(Z, K)
    uniq, first, inverse = np.unique(C, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.ravel()
    counts, sums, sumsq = allocation_stats(uniq, y, K)
    score = _log_partition_prior_rows(counts, alpha[0], K) + log_marginal_array(counts, sums, sumsq, prior).sum(axis=1)
    best = np.flatnonzero(score == score.max())
    ties = int(best.size)
    j = int(best[np.argmin(first[best])])
    hits = (inverse == j).astype(float)
    n_hits = int(hits.sum())
    if n_hits < min_hits:
        raise InsufficientOccupancyError(
            f"selected partition visited {n_hits} < {min_hits} times; run a longer chain"
        )
    p_hat = n_hits / hits.size
    se = delta_method_se_log(p_hat, newey_west_variance(hits, q_lag))
    info = {"n_unique": int(uniq.shape[0]), "hits": n_hits, "ties": ties, "partition": uniq[j].tolist()}
    return float(score[j] - math.log(p_hat)), se, info


def chib_partition(data, K: int, prior: NIGPrior, alpha, T: int = 10**4, burnin: int = 1000, q_lag=None, seed=None,
                   chain=None, z0=None):
    t0 = time.perf_counter()
    y = _data(data)
    alpha = _as_alpha(alpha, K)
    chain = _get_chain(chain, y, K, prior, alpha, T, burnin, _rng(seed), z0)
    est, se, info = chib_partition_from_allocations(chain.z, y, K, prior, alpha, q_lag)
    tuning = {"T": len(chain), "burnin": chain.meta.get("burnin", burnin), "q_lag": q_lag,
              "n_unique": info["n_unique"], "hits": info["hits"], "ties": info["ties"]}
    return EvidenceEstimate(est, se, "chib-partition", tuning, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# bridge sampling


class _PermutedPosteriorMixture:
    """Equal-weight mixture of conditional posteriors pi(theta | y, s(z)) over allocations and permutations."""

    def __init__(self, Z, y, K, prior, alpha):
        counts, sums, sumsq = allocation_stats(Z, y, K)
        perms = all_permutations(K)
        idx = perms[None, :, :]
        # (T0 * K!, K) statistics, one row per (allocation, permutation)
        c = np.take_along_axis(counts[:, None, :], idx, axis=2).reshape(-1, K)
        s = np.take_along_axis(sums[:, None, :], idx, axis=2).reshape(-1, K)
        ss = np.take_along_axis(sumsq[:, None, :], idx, axis=2).reshape(-1, K)
        self.mu_n, self.lam_n, self.a_n, self.b_n = posterior_params_array(c, s, ss, prior)
        self.a_dir = alpha[None, :] + c
        self.n_comp = c.shape[0]
        self.const = (
            gammaln(self.a_dir.sum(axis=1))
            - gammaln(self.a_dir).sum(axis=1)
            + np.sum(self.a_n * np.log(self.b_n) - gammaln(self.a_n) + 0.5 * np.log(self.lam_n) - 0.5 * LOG_2PI, axis=1)
        )

    def sample(self, size, rng):
        j = rng.integers(self.n_comp, size=size)
        g = rng.gamma(self.a_dir[j], 1.0)
        w = g / g.sum(axis=1, keepdims=True)
        s2 = self.b_n[j] / rng.gamma(self.a_n[j], 1.0)
        mu = self.mu_n[j] + np.sqrt(s2 / self.lam_n[j]) * rng.standard_normal(s2.shape)
        return mu, s2, w

    def log_density(self, mu, s2, w, budget: int = 2_000_000):
        D, K = mu.shape
        out = np.empty(D)
        step = max(1, budget // (self.n_comp * K))
        logw, logs2 = np.log(w), np.log(s2)
        for start in range(0, D, step):
            sl = slice(start, start + step)
            m, v = mu[sl, None, :], s2[sl, None, :]
            t = (
                (self.a_dir[None] - 1.0) * logw[sl, None, :]
                - (self.a_n[None] + 1.5) * logs2[sl, None, :]
                - (self.b_n[None] + 0.5 * self.lam_n[None] * (m - self.mu_n[None]) ** 2) / v
            )
            out[sl] = logsumexp(t.sum(axis=2) + self.const[None, :], axis=1)
        return out - math.log(self.n_comp)


def _bridge_iterate(l1, l2, log_n1, log_n2, log_m0, tol, max_iter):
    """Optimal-bridge fixed point on log(p_tilde / q) evaluated under q (l1) and the posterior (l2)."""
    trace = [log_m0]
    log_m = log_m0
    c1, c2 = math.log(l1.size), math.log(l2.size)
    for _ in range(max_iter):
        num = logsumexp(l1 - np.logaddexp(log_n1, log_n2 + l1 - log_m)) - c1
        den = logsumexp(-np.logaddexp(log_n1, log_n2 + l2 - log_m)) - c2
        new = float(num - den)
        trace.append(new)
        if not np.isfinite(new):
            raise ConvergenceError("bridge recursion produced a non-finite value", trace)
        if abs(new - log_m) < tol:
            return new, trace
        log_m = new
    raise ConvergenceError(f"bridge recursion did not converge in {max_iter} iterations", trace)


def bridge_sampling(data, K: int, prior: NIGPrior, alpha, T0: int = 100, T1: int = 12000, T2: int = 12000,
                    burnin: int = 5000, tol: float = 1e-10, max_iter: int = 500, seed=None, chain=None,
                    init_log_evidence: float | None = None):
    """Bridge sampling with a permutation-symmetrised mixture of conditional posteriors as q."""
    t0 = time.perf_counter()
    y = _data(data)
    alpha = _as_alpha(alpha, K)
    if K > MAX_PERMUTATION_K:
        raise GuardError(f"bridge sampling enumerates K! = {math.factorial(K)} permutations (limit K <= 6)")
    if min(T0, T1) < 1:
        raise InvalidInputError("T0 and T1 must be positive")
    rng = _rng(seed)
    chain = _get_chain(chain, y, K, prior, alpha, T2, burnin, rng)
    picks = rng.integers(len(chain), size=T0)
    q = _PermutedPosteriorMixture(chain.z[picks], y, K, prior, alpha)

    mu1, s21, w1 = q.sample(T1, rng)
    l1 = mixture_log_likelihood(mu1, s21, w1, y) + fm_log_prior(mu1, s21, w1, prior, alpha) - q.log_density(mu1, s21, w1)
    l2 = (
        chain.loglik
        + fm_log_prior(chain.mu, chain.sigma2, chain.weights, prior, alpha)
        - q.log_density(chain.mu, chain.sigma2, chain.weights)
    )
    n2_eff = ess_batch_means(l2) if l2.size >= 16 else float(l2.size)
    log_n1, log_n2 = math.log(T1), math.log(n2_eff)
    log_m0 = log_mean_exp(l1) if init_log_evidence is None else float(init_log_evidence)
    log_m, trace = _bridge_iterate(l1, l2, log_n1, log_n2, log_m0, tol, max_iter)
    s1 = T1 / (T1 + n2_eff)
    se = bridge_log_relative_error(l1 - log_m, l2 - log_m, s1, 1.0 - s1, n2_eff)
    tuning = {"T0": int(T0), "T1": int(T1), "T2": len(chain), "burnin": chain.meta.get("burnin", burnin),
              "n2_eff": float(n2_eff), "iterations": len(trace) - 1, "init": float(log_m0)}
    return EvidenceEstimate(log_m, se, "bridge", tuning, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# tempered sequential Monte Carlo


def _to_unconstrained(mu, s2, w):
    return np.concatenate([mu, np.log(s2), np.log(w[:, :-1]) - np.log(w[:, -1:])], axis=1)


def _from_unconstrained(U, K):
    mu = U[:, :K]
    s2 = np.exp(U[:, K : 2 * K])
    a = np.concatenate([U[:, 2 * K :], np.zeros((U.shape[0], 1))], axis=1)
    logw = a - logsumexp(a, axis=1, keepdims=True)
    return mu, s2, np.exp(logw), logw


def _smc_terms(U, K, y, prior, alpha):
    """(log likelihood, log prior density of U including the change-of-variables Jacobian)."""
    mu, s2, w, logw = _from_unconstrained(U, K)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        ll = mixture_log_likelihood(mu, s2, w, y)
        lp = fm_log_prior(mu, s2, w, prior, alpha) + np.log(s2).sum(axis=1) + logw.sum(axis=1)
    bad = ~(np.isfinite(ll) & np.isfinite(lp))
    ll[bad] = -np.inf
    lp[bad] = -np.inf
    return ll, lp


def _ess(logw) -> float:
    return float(np.exp(2.0 * logsumexp(logw) - logsumexp(2.0 * logw)))


def smc_evidence(data, K: int, prior: NIGPrior, alpha, N: int = 10000, M_moves: int = 10, ess_target: float = 0.5,
                 seed=None, bisect_tol: float = 1e-6, max_steps: int = 10000):
    """Likelihood-tempered SMC from the prior (lambda=0) to the posterior (lambda=1).

    Each step picks the next temperature by bisection so that the incremental
    weights have ESS close to ``ess_target * N``, resamples multinomially and
    applies ``M_moves`` random-walk Metropolis sweeps scaled by the particle
    covariance.
    """
    t0 = time.perf_counter()
    y = _data(data)
    alpha = _as_alpha(alpha, K)
    if N < 100:
        raise InvalidInputError("N must be at least 100")
    if not 0.0 < ess_target < 1.0:
        raise InvalidInputError("ess_target must lie in (0, 1)")
    rng = _rng(seed)
    temps = [0.0]
    if y.size == 0:
        return EvidenceEstimate(0.0, 0.0, "smc", {"N": N, "M_moves": M_moves, "temperatures": [0.0, 1.0]},
                                time.perf_counter() - t0)
    mu, s2, w = fm_sample_prior(K, prior, alpha, rng, size=N)
    U = _to_unconstrained(mu, s2, w)
    ll, lp = _smc_terms(U, K, y, prior, alpha)
    d = U.shape[1]
    log_z = 0.0
    var_terms = 0.0
    accept = []
    lam = 0.0
    target = ess_target * N
    while lam < 1.0:
        if len(temps) > max_steps:
            raise DegeneracyError("temperature schedule exceeded the step limit", temps)
        ll_fin = np.where(np.isfinite(ll), ll, -np.inf)
        if _ess((1.0 - lam) * ll_fin) >= target:
            new = 1.0
        else:
            lo, hi = 0.0, 1.0 - lam
            while hi - lo > bisect_tol:
                mid = 0.5 * (lo + hi)
                if _ess(mid * ll_fin) >= target:
                    lo = mid
                else:
                    hi = mid
            new = lam + max(lo, bisect_tol)
            if new >= 1.0:
                new = 1.0
        inc = (new - lam) * ll_fin
        ess = _ess(inc)
        if not ess >= 2.0:
            raise DegeneracyError(f"ESS collapsed to {ess:.3g} at temperature {new}", temps + [new])
        lme = log_mean_exp(inc)
        log_z += lme
        r = np.exp(inc - lme)
        var_terms += float(np.var(r, ddof=1)) / N
        lam = new
        temps.append(lam)
        # multinomial resampling
        p = np.exp(inc - logsumexp(inc))
        idx = rng.choice(N, size=N, p=p)
        U, ll, lp = U[idx], ll[idx], lp[idx]
        # random-walk Metropolis moves targeting prior * likelihood^lam
        cov = np.cov(U, rowvar=False) * (2.38**2 / d) + 1e-10 * np.eye(d)
        L = np.linalg.cholesky(cov)
        n_acc = 0
        for _ in range(M_moves):
            prop = U + rng.standard_normal(U.shape) @ L.T
            ll_p, lp_p = _smc_terms(prop, K, y, prior, alpha)
            with np.errstate(invalid="ignore"):
                log_ratio = lp_p + lam * ll_p - lp - lam * ll
            ok = np.log(rng.random(N)) < np.where(np.isnan(log_ratio), -np.inf, log_ratio)
            U[ok], ll[ok], lp[ok] = prop[ok], ll_p[ok], lp_p[ok]
            n_acc += int(ok.sum())
        accept.append(n_acc / max(1, N * M_moves))
    tuning = {
        "N": int(N),
        "M_moves": int(M_moves),
        "ess_target": float(ess_target),
        "n_steps": len(temps) - 1,
        "temperatures": [float(v) for v in temps],
        "mean_acceptance": float(np.mean(accept)) if accept else None,
    }
    return EvidenceEstimate(log_z, math.sqrt(var_terms), "smc", tuning, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# sequential importance sampling over allocations


def sis_log_weights(data, K: int, prior: NIGPrior, alpha, T: int, rng, chunk: int = 20000) -> np.ndarray:
    """T independent sequential imputations; returns their log importance weights."""
    y = _data(data)
    alpha = _as_alpha(alpha, K)
    out = np.zeros(T)
    log_alpha_sum = math.log(alpha.sum())
    for start in range(0, T, chunk):
        m = min(chunk, T - start)
        rows = np.arange(m)
        counts = np.zeros((m, K))
        sums = np.zeros((m, K))
        sumsq = np.zeros((m, K))
        logw = np.zeros(m)
        for i, yi in enumerate(y):
            lg = (
                log_predictive_array(counts, sums, sumsq, yi, prior)
                + np.log(counts + alpha)
                - (math.log(i + alpha.sum()) if i else log_alpha_sum)
            )
            norm = logsumexp(lg, axis=1)
            logw += norm
            cum = np.cumsum(np.exp(lg - norm[:, None]), axis=1)
            u = rng.random(m)[:, None] * cum[:, -1:]
            z = np.minimum((cum <= u).sum(axis=1), K - 1)
            counts[rows, z] += 1.0
            sums[rows, z] += yi
            sumsq[rows, z] += yi * yi
        out[start : start + m] = logw
    return out


def sis_evidence(data, K: int, prior: NIGPrior, alpha, T: int = 6000, seed=None):
    """Sequential imputation of the allocations with predictive-ratio weights."""
    t0 = time.perf_counter()
    y = _data(data)
    alpha = _as_alpha(alpha, K)
    if T < 2:
        raise InvalidInputError("T must be at least 2")
    if y.size == 0:
        return EvidenceEstimate(0.0, 0.0, "sis", {"T": int(T)}, time.perf_counter() - t0)
    lw = sis_log_weights(y, K, prior, alpha, T, _rng(seed))
    return EvidenceEstimate(log_mean_exp(lw), log_mean_exp_se(lw), "sis", {"T": int(T)}, time.perf_counter() - t0)


def run_fm_estimator(name: str, data, K: int, prior: NIGPrior, alpha, seed=None, **tuning) -> EvidenceEstimate:
    """Dispatch by estimator id."""
    table = {
        "am": arithmetic_mean,
        "hm": harmonic_mean,
        "chib": chib,
        "chib-perm": lambda *a, **k: chib_permutation(*a, mode="full", **k),
        "chib-randperm": lambda *a, **k: chib_permutation(*a, mode="random", **k),
        "chib-partition": chib_partition,
        "bridge": bridge_sampling,
        "smc": smc_evidence,
        "sis": sis_evidence,
    }
    if name not in table:
        raise InvalidInputError(f"unknown finite-mixture estimator {name!r}; choose from {sorted(table)}")
    return table[name](data, K, prior, alpha, seed=seed, **tuning)
