"""Conjugate Dirichlet process mixtures of univariate Gaussians.

Allocations are carried as canonical (first-appearance, 0-based) label
vectors, so the number of occupied clusters of ``z`` is ``z.max() + 1``.

The concentration ``M`` has a Gamma(a, b) prior (shape a, *rate* b) and is
updated with the auxiliary-variable scheme of Escobar and West:

    eta | M, K  ~ Beta(M + 1, n)
    M | eta, K  ~ w Gamma(a + K, b - log eta) + (1 - w) Gamma(a + K - 1, b - log eta)
    w / (1 - w) = (a + K - 1) / (n (b - log eta))

The sequential samplers are compiled with numba and draw from the
``numpy.random.Generator`` they are handed, so results are reproducible from
a seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy.special import gammaln

from .conjugate import NIGPrior, log_marginal_array, nb_log_marginal, nb_log_predictive
from .exceptions import InvalidInputError
from .partitions import canonical_labels, cluster_stats


@dataclass(frozen=True)
class GammaPrior:
    """Gamma prior on the concentration, shape ``a`` and rate ``b``."""

    a: float = 1.0
    b: float = 1.0

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0 and math.isfinite(self.a) and math.isfinite(self.b)):
            raise InvalidInputError(f"Gamma prior needs positive finite (a, b), got ({self.a}, {self.b})")

    def logpdf(self, M):
        M = np.asarray(M, dtype=float)
        with np.errstate(divide="ignore"):
            out = self.a * math.log(self.b) - math.lgamma(self.a) + (self.a - 1.0) * np.log(M) - self.b * M
        return np.where(M > 0, out, -np.inf)

    def sample(self, rng, size=None):
        return rng.gamma(self.a, 1.0 / self.b, size=size)

    def to_dict(self):
        return {"a": self.a, "b": self.b}


@dataclass
class DPMState:
    z: np.ndarray
    M: float
    eta: float = 0.5

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=np.int64)
        if not self.M > 0:
            raise InvalidInputError("M must be positive")
        if not 0.0 < self.eta < 1.0:
            raise InvalidInputError("eta must lie in (0, 1)")

    @property
    def n_clusters(self) -> int:
        return int(self.z.max()) + 1 if self.z.size else 0


@dataclass
class DPMChain:
    z: np.ndarray  # (T, n) canonical labels
    M: np.ndarray  # (T,)
    eta: np.ndarray  # (T,) auxiliary draw that produced M[t]
    n_clusters: np.ndarray  # (T,) occupied clusters when M[t] was drawn
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.M.size


# ---------------------------------------------------------------------------
# closed forms


def dpm_log_prior_z(z, M: float) -> float:
    """log Gamma(M)/Gamma(M+n) * M^K * prod_j Gamma(n_j): the Polya-urn allocation prior."""
    if not M > 0:
        raise InvalidInputError("M must be positive")
    z = np.asarray(z).ravel()
    if z.size == 0:
        return 0.0
    sizes = np.bincount(canonical_labels(z))
    return float(
        math.lgamma(M) - math.lgamma(M + z.size) + sizes.size * math.log(M) + np.sum(gammaln(sizes))
    )


def dpm_log_likelihood_z(z, data, prior: NIGPrior) -> float:
    """log p(y | z): product of conjugate marginals over the occupied blocks."""
    c, s, ss = cluster_stats(canonical_labels(z), data)
    return float(np.sum(log_marginal_array(c, s, ss, prior)))


def concentration_log_density(M, eta, n_clusters, n: int, gprior: GammaPrior):
    """log p(M | eta, K, n): the two-component Gamma mixture, vectorised over (eta, K)."""
    M = float(M)
    eta = np.asarray(eta, dtype=float)
    k = np.asarray(n_clusters, dtype=float)
    a, b = gprior.a, gprior.b
    rate = b - np.log(eta)
    log_odds_num = np.log(a + k - 1.0)
    log_odds_den = math.log(n) + np.log(rate)
    # log w and log(1 - w)
    log_den = np.logaddexp(log_odds_num, log_odds_den)
    log_w, log_1mw = log_odds_num - log_den, log_odds_den - log_den
    lg1 = (a + k) * np.log(rate) - gammaln(a + k) + (a + k - 1.0) * math.log(M) - rate * M
    lg2 = (a + k - 1.0) * np.log(rate) - gammaln(a + k - 1.0) + (a + k - 2.0) * math.log(M) - rate * M
    return np.logaddexp(log_w + lg1, log_1mw + lg2)


# ---------------------------------------------------------------------------
# compiled kernels


@njit(cache=True)
def _canonicalize_inplace(z, n_clusters):
    remap = np.full(n_clusters, -1, dtype=np.int64)
    nxt = 0
    for i in range(z.size):
        c = z[i]
        if remap[c] < 0:
            remap[c] = nxt
            nxt += 1
        z[i] = remap[c]


@njit(cache=True)
def _categorical(logp, m, rng):
    mx = logp[0]
    for k in range(1, m):
        if logp[k] > mx:
            mx = logp[k]
    tot = 0.0
    for k in range(m):
        logp[k] = math.exp(logp[k] - mx)
        tot += logp[k]
    u = rng.random() * tot
    acc = 0.0
    for k in range(m):
        acc += logp[k]
        if u < acc:
            return k
    return m - 1


@njit(cache=True)
def _nb_sweep(y, z, counts, sums, sumsq, K, M, mu0, lam0, a0, b0, rng, buf):
    """One collapsed Gibbs pass over the allocations; returns the new cluster count."""
    n = y.size
    logM = math.log(M)
    for i in range(n):
        c = z[i]
        yi = y[i]
        counts[c] -= 1
        sums[c] -= yi
        sumsq[c] -= yi * yi
        if counts[c] == 0:
            # keep labels contiguous: move the last cluster into the emptied slot
            last = K - 1
            if c != last:
                counts[c] = counts[last]
                sums[c] = sums[last]
                sumsq[c] = sumsq[last]
                for j in range(n):
                    if z[j] == last:
                        z[j] = c
            counts[last] = 0
            sums[last] = 0.0
            sumsq[last] = 0.0
            K -= 1
        for k in range(K):
            buf[k] = math.log(counts[k]) + nb_log_predictive(counts[k], sums[k], sumsq[k], yi, mu0, lam0, a0, b0)
        buf[K] = logM + nb_log_predictive(0, 0.0, 0.0, yi, mu0, lam0, a0, b0)
        k = _categorical(buf, K + 1, rng)
        if k == K:
            K += 1
            sums[k] = 0.0
            sumsq[k] = 0.0
        z[i] = k
        counts[k] += 1
        sums[k] += yi
        sumsq[k] += yi * yi
    return K


@njit(cache=True)
def _nb_concentration(M, K, n, a, b, rng):
    eta = rng.beta(M + 1.0, float(n))
    if eta <= 0.0:
        eta = 1e-300
    rate = b - math.log(eta)
    odds = (a + K - 1.0) / (n * rate)
    if rng.random() < odds / (1.0 + odds):
        M = rng.gamma(a + K, 1.0 / rate)
    else:
        M = rng.gamma(a + K - 1.0, 1.0 / rate)
    if M < 1e-300:
        M = 1e-300
    return eta, M


@njit(cache=True)
def _nb_stats(y, z, counts, sums, sumsq):
    counts[:] = 0
    sums[:] = 0.0
    sumsq[:] = 0.0
    K = 0
    for i in range(y.size):
        c = z[i]
        counts[c] += 1
        sums[c] += y[i]
        sumsq[c] += y[i] * y[i]
        if c + 1 > K:
            K = c + 1
    return K


@njit(cache=True)
def _nb_chain(y, z0, M0, T, burnin, mu0, lam0, a0, b0, a, b, rng):
    n = y.size
    z = z0.copy()
    counts = np.zeros(n + 1, dtype=np.int64)
    sums = np.zeros(n + 1)
    sumsq = np.zeros(n + 1)
    buf = np.empty(n + 2)
    K = _nb_stats(y, z, counts, sums, sumsq)
    M = M0
    Z = np.empty((T, n), dtype=np.int64)
    Ms = np.empty(T)
    etas = np.empty(T)
    Ks = np.empty(T, dtype=np.int64)
    for t in range(burnin + T):
        K = _nb_sweep(y, z, counts, sums, sumsq, K, M, mu0, lam0, a0, b0, rng, buf)
        eta, M = _nb_concentration(M, K, n, a, b, rng)
        if t >= burnin:
            j = t - burnin
            Z[j] = z
            _canonicalize_inplace(Z[j], K)
            Ms[j] = M
            etas[j] = eta
            Ks[j] = K
    return Z, Ms, etas, Ks


@njit(cache=True)
def _nb_sis(y, Ms, mu0, lam0, a0, b0, rng):
    """Sequential imputation, one replicate per entry of Ms.

    Returns allocations, log weights (sum of log normalisers) and the log
    density of the realised allocation under the imputation distribution.
    """
    T = Ms.size
    n = y.size
    Z = np.empty((T, n), dtype=np.int64)
    logw = np.zeros(T)
    logq = np.zeros(T)
    counts = np.zeros(n + 1, dtype=np.int64)
    sums = np.zeros(n + 1)
    sumsq = np.zeros(n + 1)
    buf = np.empty(n + 2)
    for t in range(T):
        M = Ms[t]
        logM = math.log(M)
        K = 0
        for i in range(n):
            yi = y[i]
            log_denom = math.log(M + i)
            mx = -np.inf
            for k in range(K):
                buf[k] = math.log(counts[k]) - log_denom + nb_log_predictive(
                    counts[k], sums[k], sumsq[k], yi, mu0, lam0, a0, b0
                )
                if buf[k] > mx:
                    mx = buf[k]
            buf[K] = logM - log_denom + nb_log_predictive(0, 0.0, 0.0, yi, mu0, lam0, a0, b0)
            if buf[K] > mx:
                mx = buf[K]
            tot = 0.0
            for k in range(K + 1):
                tot += math.exp(buf[k] - mx)
            log_norm = mx + math.log(tot)
            u = rng.random() * tot
            acc = 0.0
            pick = K
            for k in range(K + 1):
                acc += math.exp(buf[k] - mx)
                if u < acc:
                    pick = k
                    break
            logw[t] += log_norm
            logq[t] += buf[pick] - log_norm
            if pick == K:
                K += 1
            Z[t, i] = pick
            counts[pick] += 1
            sums[pick] += yi
            sumsq[pick] += yi * yi
        for k in range(K):
            counts[k] = 0
            sums[k] = 0.0
            sumsq[k] = 0.0
    return Z, logw, logq


@njit(cache=True)
def _nb_sis_logdensity(Z, Ms, y, mu0, lam0, a0, b0):
    """log density of given canonical allocations under the imputation distribution."""
    T, n = Z.shape
    out = np.zeros(T)
    counts = np.zeros(n + 1, dtype=np.int64)
    sums = np.zeros(n + 1)
    sumsq = np.zeros(n + 1)
    buf = np.empty(n + 2)
    for t in range(T):
        M = Ms[t]
        logM = math.log(M)
        K = 0
        for i in range(n):
            yi = y[i]
            mx = -np.inf
            for k in range(K):
                buf[k] = math.log(counts[k]) + nb_log_predictive(counts[k], sums[k], sumsq[k], yi, mu0, lam0, a0, b0)
                if buf[k] > mx:
                    mx = buf[k]
            buf[K] = logM + nb_log_predictive(0, 0.0, 0.0, yi, mu0, lam0, a0, b0)
            if buf[K] > mx:
                mx = buf[K]
            tot = 0.0
            for k in range(K + 1):
                tot += math.exp(buf[k] - mx)
            c = Z[t, i]
            out[t] += buf[c] - mx - math.log(tot)
            if c == K:
                K += 1
            counts[c] += 1
            sums[c] += yi
            sumsq[c] += yi * yi
        for k in range(K):
            counts[k] = 0
            sums[k] = 0.0
            sumsq[k] = 0.0
    return out


@njit(cache=True)
def _nb_urn(n, Ms, rng):
    T = Ms.size
    Z = np.empty((T, n), dtype=np.int64)
    counts = np.zeros(n + 1, dtype=np.int64)
    for t in range(T):
        M = Ms[t]
        K = 0
        for i in range(n):
            u = rng.random() * (M + i)
            acc = 0.0
            pick = K
            for k in range(K):
                acc += counts[k]
                if u < acc:
                    pick = k
                    break
            if pick == K:
                K += 1
            Z[t, i] = pick
            counts[pick] += 1
        counts[:K] = 0
    return Z


@njit(cache=True)
def _nb_partition_terms(Z, y, mu0, lam0, a0, b0):
    """Per row: (number of blocks, sum_j log Gamma(n_j), log p(y | z)) for canonical allocations."""
    T, n = Z.shape
    k_out = np.empty(T, dtype=np.int64)
    lg_out = np.empty(T)
    ll_out = np.empty(T)
    counts = np.zeros(n + 1, dtype=np.int64)
    sums = np.zeros(n + 1)
    sumsq = np.zeros(n + 1)
    for t in range(T):
        K = _nb_stats(y, Z[t], counts, sums, sumsq)
        lg = 0.0
        ll = 0.0
        for k in range(K):
            lg += math.lgamma(counts[k])
            ll += nb_log_marginal(counts[k], sums[k], sumsq[k], mu0, lam0, a0, b0)
        k_out[t] = K
        lg_out[t] = lg
        ll_out[t] = ll
    return k_out, lg_out, ll_out


# ---------------------------------------------------------------------------
# Python entry points


def _prep(data) -> np.ndarray:
    y = np.ascontiguousarray(np.asarray(data, dtype=float).ravel())
    if not np.all(np.isfinite(y)):
        raise InvalidInputError("data must be finite")
    return y


def dpm_gibbs_sweep(state: DPMState, data, prior: NIGPrior, gprior: GammaPrior, rng) -> DPMState:
    """One sweep: every z_i from its collapsed conditional, then eta, then M."""
    y = _prep(data)
    n = y.size
    z = canonical_labels(state.z).astype(np.int64)
    counts = np.zeros(n + 1, dtype=np.int64)
    sums = np.zeros(n + 1)
    sumsq = np.zeros(n + 1)
    K = _nb_stats(y, z, counts, sums, sumsq)
    mu0, lam0, a0, b0 = prior.as_tuple()
    K = _nb_sweep(y, z, counts, sums, sumsq, K, float(state.M), mu0, lam0, a0, b0, rng, np.empty(n + 2))
    eta, M = _nb_concentration(float(state.M), K, n, gprior.a, gprior.b, rng)
    _canonicalize_inplace(z, K)
    return DPMState(z, M, eta)


def run_dpm_gibbs(data, prior: NIGPrior, gprior: GammaPrior, T: int, burnin: int, rng, M0: float | None = None,
                  z0=None) -> DPMChain:
    """Collapsed Gibbs chain over (z, M); starts from one cluster and M0 = prior mean by default."""
    y = _prep(data)
    if y.size == 0:
        raise InvalidInputError("empty data")
    if T < 1 or burnin < 0:
        raise InvalidInputError("need T >= 1 and burnin >= 0")
    z = np.zeros(y.size, dtype=np.int64) if z0 is None else canonical_labels(z0).astype(np.int64)
    M = gprior.a / gprior.b if M0 is None else float(M0)
    mu0, lam0, a0, b0 = prior.as_tuple()
    Z, Ms, etas, Ks = _nb_chain(y, z, M, int(T), int(burnin), mu0, lam0, a0, b0, gprior.a, gprior.b, rng)
    return DPMChain(Z, Ms, etas, Ks, {"T": int(T), "burnin": int(burnin)})


def dpm_sis_batch(data, M, prior: NIGPrior, rng):
    """Sequential imputations, one per entry of ``M`` (array).

    Returns ``(Z, log_weight, log_q)`` where ``log_weight`` estimates
    log L(y | M, G0) without bias on the linear scale and ``log_q`` is the log
    probability of the drawn allocation under the imputation scheme.
    """
    y = _prep(data)
    Ms = np.ascontiguousarray(np.atleast_1d(np.asarray(M, dtype=float)))
    if np.any(~(Ms > 0)):
        raise InvalidInputError("M must be positive")
    mu0, lam0, a0, b0 = prior.as_tuple()
    return _nb_sis(y, Ms, mu0, lam0, a0, b0, rng)


def dpm_sis_impute(data, M: float, prior: NIGPrior, seed=None):
    """One sequential imputation at fixed M: ``(z, log_weight, log_q)``."""
    rng = np.random.default_rng(seed)
    Z, lw, lq = dpm_sis_batch(data, [M], prior, rng)
    return Z[0], float(lw[0]), float(lq[0])


def dpm_sis_log_density(Z, M, data, prior: NIGPrior) -> np.ndarray:
    """log pi*(z | y, M) for given canonical allocations (rows of ``Z``) and concentrations."""
    y = _prep(data)
    Z = np.ascontiguousarray(np.atleast_2d(np.asarray(Z, dtype=np.int64)))
    Ms = np.ascontiguousarray(np.broadcast_to(np.asarray(M, dtype=float), (Z.shape[0],)))
    mu0, lam0, a0, b0 = prior.as_tuple()
    return _nb_sis_logdensity(Z, Ms, y, mu0, lam0, a0, b0)


def dpm_sample_urn(n: int, M, rng) -> np.ndarray:
    """Allocations from the Polya urn, one row per entry of ``M``."""
    Ms = np.ascontiguousarray(np.atleast_1d(np.asarray(M, dtype=float)))
    return _nb_urn(int(n), Ms, rng)


def dpm_partition_terms(Z, data, prior: NIGPrior):
    """Vectorised (K+, sum log Gamma(n_j), log p(y | z)) for canonical allocations."""
    y = _prep(data)
    Z = np.ascontiguousarray(np.atleast_2d(np.asarray(Z, dtype=np.int64)))
    mu0, lam0, a0, b0 = prior.as_tuple()
    return _nb_partition_terms(Z, y, mu0, lam0, a0, b0)


def dpm_log_prior_batch(k, log_gamma_sizes, M, n: int) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    return gammaln(M) - gammaln(M + n) + k * np.log(M) + log_gamma_sizes
