"""Finite Gaussian mixtures with a Dirichlet prior on the weights and a
normal / inverse-gamma prior on each component.

Parameters are carried as three arrays (``mu``, ``sigma2``, ``weights``) with
the component axis last, so every density below broadcasts over leading
particle / iteration axes.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp

from .conjugate import LOG_2PI, NIGPrior, log_nig_density, posterior_params_array
from .exceptions import InvalidInputError


@dataclass
class FMParams:
    mu: np.ndarray
    sigma2: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        self.sigma2 = np.asarray(self.sigma2, dtype=float)
        self.weights = np.asarray(self.weights, dtype=float)
        if not (self.mu.shape == self.sigma2.shape == self.weights.shape):
            raise InvalidInputError("mu, sigma2 and weights must share a shape")
        if np.any(self.sigma2 <= 0) or np.any(self.weights < 0):
            raise InvalidInputError("variances must be positive and weights nonnegative")
        if not np.allclose(self.weights.sum(axis=-1), 1.0, rtol=0, atol=1e-12):
            raise InvalidInputError("weights must sum to one")

    @property
    def K(self) -> int:
        return self.mu.shape[-1]

    def permuted(self, perm) -> "FMParams":
        perm = np.asarray(perm)
        return FMParams(self.mu[..., perm], self.sigma2[..., perm], self.weights[..., perm])


@dataclass
class GibbsState:
    params: FMParams
    z: np.ndarray


@dataclass
class FMChain:
    """Stored output of a finite-mixture Gibbs run (after burn-in)."""

    mu: np.ndarray  # (T, K)
    sigma2: np.ndarray  # (T, K)
    weights: np.ndarray  # (T, K)
    z: np.ndarray  # (T, n) labels in 0..K-1
    loglik: np.ndarray  # (T,)
    log_augmented: np.ndarray  # (T,) log p(y, z | theta) + log prior(theta)
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.z.shape[0]

    def params(self, t: int) -> FMParams:
        return FMParams(self.mu[t], self.sigma2[t], self.weights[t])


def _as_alpha(alpha, K: int) -> np.ndarray:
    a = np.asarray(alpha, dtype=float).ravel()
    if a.size == 1:
        a = np.full(K, float(a[0]))
    if a.size != K or np.any(~(a > 0)):
        raise InvalidInputError(f"alpha must be a positive scalar or length-{K} vector")
    return a


def component_log_density(y, mu, sigma2):
    """log N(y_i | mu_k, sigma2_k) with shape (..., n, K)."""
    y = np.asarray(y, dtype=float)
    mu = np.asarray(mu)[..., None, :]
    s2 = np.asarray(sigma2)[..., None, :]
    return -0.5 * (LOG_2PI + np.log(s2)) - (y[:, None] - mu) ** 2 / (2.0 * s2)


def mixture_log_likelihood(mu, sigma2, weights, data, chunk: int = 20000) -> np.ndarray:
    """sum_i log sum_k w_k N(y_i | mu_k, sigma2_k), broadcast over leading axes."""
    data = np.asarray(data, dtype=float).ravel()
    mu = np.asarray(mu, dtype=float)
    sigma2 = np.asarray(sigma2, dtype=float)
    weights = np.asarray(weights, dtype=float)
    lead = mu.shape[:-1]
    if data.size == 0:
        return np.zeros(lead)
    if mu.ndim == 1:
        with np.errstate(divide="ignore"):
            lw = np.log(weights)
        return float(np.sum(logsumexp(component_log_density(data, mu, sigma2) + lw, axis=-1)))
    K = mu.shape[-1]
    mu2, s22, w2 = mu.reshape(-1, K), sigma2.reshape(-1, K), weights.reshape(-1, K)
    out = np.empty(mu2.shape[0])
    with np.errstate(divide="ignore"):
        lw2 = np.log(w2)
    for start in range(0, mu2.shape[0], chunk):
        sl = slice(start, start + chunk)
        lp = component_log_density(data, mu2[sl], s22[sl]) + lw2[sl][:, None, :]
        out[sl] = logsumexp(lp, axis=-1).sum(axis=-1)
    return out.reshape(lead)


def fm_log_likelihood(params: FMParams, data) -> float:
    return float(mixture_log_likelihood(params.mu, params.sigma2, params.weights, data))


def log_dirichlet(weights, alpha) -> np.ndarray:
    """Dirichlet log density on the simplex (w.r.t. the first K-1 coordinates)."""
    w = np.asarray(weights, dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(alpha == 1.0, 0.0, (alpha - 1.0) * np.log(w))
    return gammaln(alpha.sum(axis=-1)) - gammaln(alpha).sum(axis=-1) + terms.sum(axis=-1)


def fm_log_prior(mu, sigma2, weights, prior: NIGPrior, alpha) -> np.ndarray:
    """log pi_K(theta): Dirichlet(weights) times independent NIG components."""
    mu0, lam0, a0, b0 = prior.as_tuple()
    alpha = _as_alpha(alpha, np.shape(mu)[-1])
    return log_dirichlet(weights, alpha) + log_nig_density(mu, sigma2, mu0, lam0, a0, b0).sum(axis=-1)


def fm_sample_prior(K: int, prior: NIGPrior, alpha, rng, size=None):
    """Draw from the prior; returns FMParams (``size=None``) or stacked arrays."""
    alpha = _as_alpha(alpha, K)
    mu0, lam0, a0, b0 = prior.as_tuple()
    shape = (K,) if size is None else (int(size), K)
    g = rng.gamma(alpha, 1.0, size=shape)
    w = g / g.sum(axis=-1, keepdims=True)
    sigma2 = b0 / rng.gamma(a0, 1.0, size=shape)
    mu = mu0 + np.sqrt(sigma2 / lam0) * rng.standard_normal(shape)
    if size is None:
        return FMParams(mu, sigma2, w)
    return mu, sigma2, w


def _sample_params_given_z(counts, sums, sumsq, prior, alpha, rng):
    mu_n, lam_n, a_n, b_n = posterior_params_array(counts, sums, sumsq, prior)
    g = rng.gamma(alpha + counts, 1.0)
    w = g / g.sum()
    sigma2 = b_n / rng.gamma(a_n, 1.0)
    mu = mu_n + np.sqrt(sigma2 / lam_n) * rng.standard_normal(mu_n.shape)
    return FMParams(mu, sigma2, w)


def sample_allocations(params: FMParams, data, rng) -> np.ndarray:
    """z_i | theta for all i at once (the z_i are conditionally independent)."""
    with np.errstate(divide="ignore"):
        lp = component_log_density(data, params.mu, params.sigma2) + np.log(params.weights)
    lp -= lp.max(axis=1, keepdims=True)
    p = np.exp(lp)
    cum = np.cumsum(p, axis=1)
    u = rng.random(len(data))[:, None] * cum[:, -1:]
    return np.minimum((cum <= u).sum(axis=1), params.K - 1)


def fm_gibbs_sweep(state: GibbsState, data, prior: NIGPrior, alpha, rng) -> GibbsState:
    """One data-augmentation sweep: z | theta, then weights | z, then components | z.

    Empty components are redrawn from the prior, which is what the posterior
    conditional reduces to when no observation is allocated.
    """
    data = np.asarray(data, dtype=float)
    K = state.params.K
    alpha = _as_alpha(alpha, K)
    z = sample_allocations(state.params, data, rng)
    counts = np.bincount(z, minlength=K).astype(float)
    sums = np.bincount(z, weights=data, minlength=K)
    sumsq = np.bincount(z, weights=data * data, minlength=K)
    return GibbsState(_sample_params_given_z(counts, sums, sumsq, prior, alpha, rng), z)


def initial_allocation(data, K: int) -> np.ndarray:
    """Deterministic start: split the sorted data into K contiguous groups."""
    data = np.asarray(data, dtype=float)
    order = np.argsort(data, kind="stable")
    z = np.empty(data.size, dtype=np.int64)
    z[order] = (np.arange(data.size) * K) // max(data.size, 1)
    return z


def run_fm_gibbs(data, K: int, prior: NIGPrior, alpha, T: int, burnin: int, rng, z0=None) -> FMChain:
    """Run ``burnin + T`` sweeps from allocation ``z0`` and keep the last ``T``."""
    data = np.asarray(data, dtype=float)
    alpha = _as_alpha(alpha, K)
    z = initial_allocation(data, K) if z0 is None else np.asarray(z0, dtype=np.int64)
    counts = np.bincount(z, minlength=K).astype(float)
    sums = np.bincount(z, weights=data, minlength=K)
    sumsq = np.bincount(z, weights=data * data, minlength=K)
    state = GibbsState(_sample_params_given_z(counts, sums, sumsq, prior, alpha, rng), z)
    n = data.size
    mu = np.empty((T, K))
    s2 = np.empty((T, K))
    w = np.empty((T, K))
    Z = np.empty((T, n), dtype=np.int8 if K < 127 else np.int64)
    for t in range(burnin + T):
        state = fm_gibbs_sweep(state, data, prior, alpha, rng)
        if t >= burnin:
            i = t - burnin
            mu[i], s2[i], w[i] = state.params.mu, state.params.sigma2, state.params.weights
            Z[i] = state.z
    loglik = mixture_log_likelihood(mu, s2, w, data)
    logprior = fm_log_prior(mu, s2, w, prior, alpha)
    # complete-data log density log p(y, z | theta)
    Zl = Z.astype(np.int64)
    rows = np.arange(T)[:, None]
    with np.errstate(divide="ignore"):
        comp = np.log(w[rows, Zl]) - 0.5 * (LOG_2PI + np.log(s2[rows, Zl])) - (data[None, :] - mu[rows, Zl]) ** 2 / (
            2.0 * s2[rows, Zl]
        )
    log_aug = comp.sum(axis=1) + logprior
    return FMChain(mu, s2, w, Zl, loglik, log_aug, {"T": T, "burnin": burnin})


def allocation_stats(Z, data, K: int):
    """(T, K) arrays of counts, sums and sums of squares for a batch of allocations."""
    Z = np.asarray(Z, dtype=np.int64)
    data = np.asarray(data, dtype=float)
    T, n = Z.shape
    idx = (Z + K * np.arange(T)[:, None]).ravel()
    yy = np.broadcast_to(data, (T, n)).ravel()
    counts = np.bincount(idx, minlength=T * K).reshape(T, K).astype(float)
    sums = np.bincount(idx, weights=yy, minlength=T * K).reshape(T, K)
    sumsq = np.bincount(idx, weights=yy * yy, minlength=T * K).reshape(T, K)
    return counts, sums, sumsq


def ordinate_from_stats(params0: FMParams, counts, sums, sumsq, prior: NIGPrior, alpha) -> np.ndarray:
    """log pi_K(theta0 | z, y) for each row of per-component statistics."""
    K = params0.K
    alpha = _as_alpha(alpha, K)
    mu_n, lam_n, a_n, b_n = posterior_params_array(counts, sums, sumsq, prior)
    lnig = log_nig_density(params0.mu, params0.sigma2, mu_n, lam_n, a_n, b_n).sum(axis=-1)
    return log_dirichlet(params0.weights, alpha + np.asarray(counts)) + lnig


def fm_posterior_ordinate(params0: FMParams, z, data, prior: NIGPrior, alpha) -> float:
    """log pi_K(theta0 | z, y): Dirichlet(alpha + n(z)) times per-cluster NIG posteriors."""
    K = params0.K
    data = np.asarray(data, dtype=float).ravel()
    z = np.asarray(z, dtype=np.int64).ravel()
    counts = np.bincount(z, minlength=K).astype(float)
    sums = np.bincount(z, weights=data, minlength=K)
    sumsq = np.bincount(z, weights=data * data, minlength=K)
    return float(ordinate_from_stats(params0, counts, sums, sumsq, prior, alpha))


def all_permutations(K: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(K))), dtype=np.int64)
