"""Evidence estimators for the conjugate Dirichlet process mixture.

``chib_dpm`` applies the candidate's formula at a single concentration M*,
with the likelihood ordinate L(y | M*) from sequential imputation and the
posterior ordinate of M* Rao-Blackwellised over the Gibbs chain.

``rlr_evidence`` fits the unknown normaliser of the posterior by reverse
logistic regression against an adversarial distribution with known
normaliser: either sequential imputation with M drawn from its prior, or the
prior itself.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logsumexp

from .conjugate import NIGPrior, cluster_log_marginal, ClusterSuffStats
from .dpm_core import (
    DPMChain,
    GammaPrior,
    concentration_log_density,
    dpm_log_prior_batch,
    dpm_partition_terms,
    dpm_sample_urn,
    dpm_sis_batch,
    dpm_sis_log_density,
    run_dpm_gibbs,
)
from .exceptions import BracketError, ConvergenceError, DegenerateEstimateError, InvalidInputError
from .fm_evidence import EvidenceEstimate, _ratio_se
from .mcstats import bridge_log_relative_error, ess_batch_means, log_mean_exp, log_mean_exp_se

DPM_ESTIMATORS = ("chib-dpm", "rlr-sis", "rlr-prior", "dpm-am", "dpm-hm")


def _data(data) -> np.ndarray:
    y = np.asarray(data, dtype=float).ravel()
    if y.size == 0:
        raise InvalidInputError("empty data")
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("data must be finite")
    return y


def _chain(chain, y, prior, gprior, T, burnin, rng) -> DPMChain:
    if chain is not None:
        return chain
    return run_dpm_gibbs(y, prior, gprior, T, burnin, rng)


def log_unnormalized_posterior(Z, M, data, prior: NIGPrior, gprior: GammaPrior) -> np.ndarray:
    """log p(y | z) pi(z | M) pi(M) for canonical allocations (rows of Z) and concentrations M."""
    y = np.asarray(data, dtype=float).ravel()
    k, lg, ll = dpm_partition_terms(Z, y, prior)
    return ll + dpm_log_prior_batch(k, lg, M, y.size) + gprior.logpdf(M)


# ---------------------------------------------------------------------------
# Chib at a fixed concentration


def _mstar(chain: DPMChain, rule) -> float:
    if callable(rule):
        return float(rule(chain.M))
    if rule == "mean":
        return float(np.mean(chain.M))
    if rule == "median":
        return float(np.median(chain.M))
    if isinstance(rule, (int, float)) and rule > 0:
        return float(rule)
    raise InvalidInputError(f"unknown M* rule {rule!r}")


def chib_dpm(data, prior: NIGPrior, gprior: GammaPrior = GammaPrior(), T1: int = 10**4, burnin: int = 1000,
             T2: int = 2000, mstar_rule="mean", seed=None, chain=None):
    """log L(y | M*) + log pi(M*) - log pi(M* | y) at M* chosen from the chain (default: posterior mean)."""
    t0 = time.perf_counter()
    y = _data(data)
    if min(T1, T2) < 100 and chain is None:
        raise InvalidInputError("T1 and T2 must be at least 100")
    rng = np.random.default_rng(seed)
    chain = _chain(chain, y, prior, gprior, T1, burnin, rng)
    M_star = _mstar(chain, mstar_rule)
    ords = concentration_log_density(M_star, chain.eta, chain.n_clusters, y.size, gprior)
    log_post = log_mean_exp(ords)
    if not np.isfinite(log_post):
        raise DegenerateEstimateError(f"posterior ordinate underflows at M*={M_star}; choose another M*")
    _, lw, _ = dpm_sis_batch(y, np.full(T2, M_star), prior, rng)
    log_lik = log_mean_exp(lw)
    est = log_lik + float(gprior.logpdf(M_star)) - log_post
    se = math.hypot(log_mean_exp_se(lw), _ratio_se(ords))
    tuning = {"T1": len(chain), "burnin": chain.meta.get("burnin", burnin), "T2": int(T2), "M_star": M_star,
              "gamma_prior": gprior.to_dict()}
    return EvidenceEstimate(est, se, "chib-dpm", tuning, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# reverse logistic regression


@dataclass
class RLRSample:
    """Log densities of one sample set: normalised adversarial and unnormalised posterior."""

    source: str  # "adversarial" or "posterior"
    log_pi1: np.ndarray
    log_pi2_tilde: np.ndarray

    def __post_init__(self):
        self.log_pi1 = np.asarray(self.log_pi1, dtype=float)
        self.log_pi2_tilde = np.asarray(self.log_pi2_tilde, dtype=float)
        if self.log_pi1.shape != self.log_pi2_tilde.shape:
            raise InvalidInputError("density arrays must have equal length")
        if not (np.all(np.isfinite(self.log_pi1)) and np.all(np.isfinite(self.log_pi2_tilde))):
            raise InvalidInputError(f"non-finite density in the {self.source} sample")


def _rlr_objective(eta, d1, d2, A, B):
    """Quasi log-likelihood and its first two derivatives in eta = log c2.

    With d = log pi2_tilde - log pi1, each point's log-odds of belonging to
    the posterior population is x = B - A + d - eta.
    """
    x1 = B - A + d1 - eta
    x2 = B - A + d2 - eta
    f = -np.sum(np.logaddexp(0.0, x1)) - np.sum(np.logaddexp(0.0, -x2))
    g1 = expit(x1)  # gamma_2 on the adversarial sample
    g2 = expit(-x2)  # gamma_1 on the posterior sample
    grad = np.sum(g1) - np.sum(g2)
    hess = -np.sum(g1 * (1.0 - g1)) - np.sum(g2 * (1.0 - g2))
    return f, grad, hess


def rlr_solve(adv: RLRSample, post: RLRSample, bracket=None, tol: float = 1e-12, max_iter: int = 200):
    """Maximise the quasi-likelihood in log c2 by Newton's method safeguarded by bisection.

    The objective is strictly concave, so its maximiser is the root of the
    (decreasing) gradient. The default bracket is the pair of simple
    importance-sampling estimates from either sample, widened until it
    contains the root.
    """
    d1 = adv.log_pi2_tilde - adv.log_pi1
    d2 = post.log_pi2_tilde - post.log_pi1
    n1, n2 = d1.size, d2.size
    if min(n1, n2) < 1:
        raise InvalidInputError("both samples must be nonempty")
    A = math.log(n1 / (n1 + n2))
    B = math.log(n2 / (n1 + n2))
    is_adv = log_mean_exp(d1)
    is_post = -log_mean_exp(-d2)
    if bracket is None:
        lo, hi = min(is_adv, is_post), max(is_adv, is_post)
    else:
        lo, hi = float(min(bracket)), float(max(bracket))
    lo, hi = lo - 1e-6, hi + 1e-6
    endpoints = {"is_adversarial": is_adv, "is_posterior": is_post}
    grad = lambda e: _rlr_objective(e, d1, d2, A, B)[1]
    width = max(hi - lo, 1.0)
    for _ in range(60):
        if grad(lo) > 0:
            break
        lo -= width
        width *= 2
    else:
        raise BracketError(f"could not bracket the RLR maximiser (IS endpoints {endpoints})", [lo, hi])
    width = max(hi - lo, 1.0)
    for _ in range(60):
        if grad(hi) < 0:
            break
        hi += width
        width *= 2
    else:
        raise BracketError(f"could not bracket the RLR maximiser (IS endpoints {endpoints})", [lo, hi])
    x = 0.5 * (lo + hi)
    trace = []
    for _ in range(max_iter):
        _, g, h = _rlr_objective(x, d1, d2, A, B)
        trace.append(x)
        if g > 0:
            lo = x
        else:
            hi = x
        step = -g / h if h < 0 else 0.0
        cand = x + step
        if not (lo < cand < hi) or h >= 0:
            cand = 0.5 * (lo + hi)
        if abs(cand - x) < tol or hi - lo < tol:
            return cand, {"iterations": len(trace), **endpoints}
        x = cand
    raise ConvergenceError("RLR Newton iteration did not converge", trace)


def rlr_standard_error(adv: RLRSample, post: RLRSample, log_c2: float, n2_eff: float) -> float:
    d1 = adv.log_pi2_tilde - adv.log_pi1 - log_c2
    d2 = post.log_pi2_tilde - post.log_pi1 - log_c2
    s1 = d1.size / (d1.size + n2_eff)
    return bridge_log_relative_error(d1, d2, s1, 1.0 - s1, n2_eff)


def _adversarial_draws(mode, y, prior, gprior, size, rng):
    """(Z, M, log pi1) drawn from the adversarial distribution."""
    M = gprior.sample(rng, size)
    M = np.maximum(M, 1e-300)
    if mode == "sis":
        Z, _, logq = dpm_sis_batch(y, M, prior, rng)
        return Z, M, gprior.logpdf(M) + logq
    if mode == "prior":
        Z = dpm_sample_urn(y.size, M, rng)
        k, lg, _ = dpm_partition_terms(Z, y, prior)
        return Z, M, gprior.logpdf(M) + dpm_log_prior_batch(k, lg, M, y.size)
    raise InvalidInputError(f"unknown adversarial mode {mode!r}; use 'sis' or 'prior'")


def _adversarial_log_density(mode, Z, M, y, prior, gprior):
    if mode == "sis":
        return gprior.logpdf(M) + dpm_sis_log_density(Z, M, y, prior)
    k, lg, _ = dpm_partition_terms(Z, y, prior)
    return gprior.logpdf(M) + dpm_log_prior_batch(k, lg, M, y.size)


def rlr_evidence(data, prior: NIGPrior, gprior: GammaPrior = GammaPrior(), adversarial: str = "sis",
                 T1: int = 2000, T2: int = 10**4, burnin: int = 1000, seed=None, chain=None, bracket=None):
    """Reverse logistic regression between T1 adversarial draws and T2 posterior Gibbs draws."""
    t0 = time.perf_counter()
    y = _data(data)
    if min(T1, T2) < 100 and chain is None:
        raise InvalidInputError("T1 and T2 must be at least 100")
    rng = np.random.default_rng(seed)
    Z1, M1, lp1_adv = _adversarial_draws(adversarial, y, prior, gprior, T1, rng)
    chain = _chain(chain, y, prior, gprior, T2, burnin, rng)
    adv = RLRSample("adversarial", lp1_adv, log_unnormalized_posterior(Z1, M1, y, prior, gprior))
    post = RLRSample(
        "posterior",
        _adversarial_log_density(adversarial, chain.z, chain.M, y, prior, gprior),
        log_unnormalized_posterior(chain.z, chain.M, y, prior, gprior),
    )
    log_c2, info = rlr_solve(adv, post, bracket)
    d2 = post.log_pi2_tilde - post.log_pi1
    n2_eff = ess_batch_means(d2) if d2.size >= 16 else float(d2.size)
    se = rlr_standard_error(adv, post, log_c2, n2_eff)
    tuning = {"T1": int(T1), "T2": len(chain), "burnin": chain.meta.get("burnin", burnin),
              "adversarial": adversarial, "n2_eff": float(n2_eff), "gamma_prior": gprior.to_dict(), **info}
    return EvidenceEstimate(log_c2, se, f"rlr-{adversarial}", tuning, time.perf_counter() - t0)


# ---------------------------------------------------------------------------
# simple baselines


def dpm_arithmetic_mean(data, prior: NIGPrior, gprior: GammaPrior = GammaPrior(), T: int = 3 * 10**4, seed=None):
    """Mean of p(y | z) over (z, M) drawn from the prior."""
    t0 = time.perf_counter()
    y = _data(data)
    rng = np.random.default_rng(seed)
    M = np.maximum(gprior.sample(rng, T), 1e-300)
    _, _, ll = dpm_partition_terms(dpm_sample_urn(y.size, M, rng), y, prior)
    return EvidenceEstimate(log_mean_exp(ll), log_mean_exp_se(ll), "dpm-am", {"T": int(T)}, time.perf_counter() - t0)


def dpm_harmonic_mean(data, prior: NIGPrior, gprior: GammaPrior = GammaPrior(), T: int = 2 * 10**4,
                      burnin: int = 2000, seed=None, chain=None):
    """Posterior harmonic mean of p(y | z) over the Gibbs chain."""
    t0 = time.perf_counter()
    y = _data(data)
    chain = _chain(chain, y, prior, gprior, T, burnin, np.random.default_rng(seed))
    _, _, ll = dpm_partition_terms(chain.z, y, prior)
    tuning = {"T": len(chain), "burnin": chain.meta.get("burnin", burnin)}
    return EvidenceEstimate(-log_mean_exp(-ll), _ratio_se(-ll), "dpm-hm", tuning, time.perf_counter() - t0)


def run_dpm_estimator(name: str, data, prior: NIGPrior, gprior: GammaPrior, seed=None, **tuning):
    table = {
        "chib-dpm": chib_dpm,
        "rlr-sis": lambda *a, **k: rlr_evidence(*a, adversarial="sis", **k),
        "rlr-prior": lambda *a, **k: rlr_evidence(*a, adversarial="prior", **k),
        "dpm-am": dpm_arithmetic_mean,
        "dpm-hm": dpm_harmonic_mean,
    }
    if name not in table:
        raise InvalidInputError(f"unknown DPM estimator {name!r}; choose from {sorted(table)}")
    return table[name](data, prior, gprior, seed=seed, **tuning)


def single_point_evidence(y1: float, prior: NIGPrior) -> float:
    """log m({y1}); the DPM evidence of one observation for any prior on M."""
    return cluster_log_marginal(ClusterSuffStats.from_data([y1]), prior)
