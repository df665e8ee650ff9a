"""Normal / inverse-gamma conjugate algebra for univariate Gaussian clusters.

The component prior is

    sigma^2 ~ InvGamma(a0, b0)          (shape a0, *scale* b0)
    mu | sigma^2 ~ N(mu0, sigma^2 / lambda0)

so that the inverse-gamma density is ``b0^a0 / Gamma(a0) * s^(-a0-1) * exp(-b0/s)``.
Note that ``b0`` is a scale, not a rate: ``E[1/sigma^2] = a0 / b0``.

Every estimator only ever needs the cluster marginal likelihood
``m(C) = int prod_{i in C} N(y_i | mu, sigma^2) dNIG(mu, sigma^2)`` and the
one-point predictive ratio ``m(C + {y}) / m(C)``; both are computed here from
sufficient statistics, in scalar, vectorised (numpy) and compiled (numba) form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy.special import gammaln

from .exceptions import DegenerateDataError, InvalidInputError

LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class NIGPrior:
    mu0: float
    lambda0: float
    a0: float
    b0: float

    def __post_init__(self):
        vals = (self.mu0, self.lambda0, self.a0, self.b0)
        if not all(math.isfinite(float(v)) for v in vals):
            raise InvalidInputError(f"non-finite prior hyperparameter in {vals}")
        if not (self.lambda0 > 0 and self.a0 > 0 and self.b0 > 0):
            raise InvalidInputError(
                f"lambda0, a0 and b0 must be positive (got {self.lambda0}, {self.a0}, {self.b0})"
            )

    def as_tuple(self):
        return (float(self.mu0), float(self.lambda0), float(self.a0), float(self.b0))

    def to_dict(self):
        return {"mu0": self.mu0, "lambda0": self.lambda0, "a0": self.a0, "b0": self.b0}


@dataclass(frozen=True)
class ClusterSuffStats:
    n: int = 0
    sum: float = 0.0
    sumsq: float = 0.0

    def __post_init__(self):
        if self.n < 0:
            raise InvalidInputError("cluster size must be nonnegative")
        if not (math.isfinite(self.sum) and math.isfinite(self.sumsq)):
            raise InvalidInputError("non-finite sufficient statistics")
        if self.n == 0 and (self.sum != 0.0 or self.sumsq != 0.0):
            raise InvalidInputError("an empty cluster must have zero sums")

    @classmethod
    def from_data(cls, y) -> "ClusterSuffStats":
        y = np.asarray(y, dtype=float).ravel()
        if not np.all(np.isfinite(y)):
            raise InvalidInputError("non-finite observation")
        # fsum is exactly rounded, which protects sumsq from cancellation on raw-scale data
        return cls(int(y.size), math.fsum(y.tolist()), math.fsum((y * y).tolist()))

    def add(self, y: float) -> "ClusterSuffStats":
        return ClusterSuffStats(self.n + 1, self.sum + y, self.sumsq + y * y)

    def remove(self, y: float) -> "ClusterSuffStats":
        if self.n == 1:
            return ClusterSuffStats()
        return ClusterSuffStats(self.n - 1, self.sum - y, self.sumsq - y * y)

    def merge(self, other: "ClusterSuffStats") -> "ClusterSuffStats":
        return ClusterSuffStats(self.n + other.n, self.sum + other.sum, self.sumsq + other.sumsq)


def _posterior_params(n, s, ss, mu0, lam0, a0, b0):
    """NIG posterior (mu_n, lambda_n, a_n, b_n) from sufficient statistics (scalar)."""
    lam_n = lam0 + n
    a_n = a0 + 0.5 * n
    if n == 0:
        return mu0, lam_n, a_n, b0
    mean = s / n
    scatter = max(ss - s * mean, 0.0)
    mu_n = (lam0 * mu0 + s) / lam_n
    b_n = b0 + 0.5 * scatter + lam0 * n * (mean - mu0) ** 2 / (2.0 * lam_n)
    return mu_n, lam_n, a_n, b_n


def cluster_log_marginal(stats: ClusterSuffStats, prior: NIGPrior) -> float:
    """log m(C); exactly 0 for an empty cluster (m of the empty set is 1)."""
    if not (math.isfinite(stats.sum) and math.isfinite(stats.sumsq)):
        raise InvalidInputError("non-finite sufficient statistics")
    if stats.n == 0:
        return 0.0
    mu0, lam0, a0, b0 = prior.as_tuple()
    _, lam_n, a_n, b_n = _posterior_params(stats.n, stats.sum, stats.sumsq, mu0, lam0, a0, b0)
    return (
        -0.5 * stats.n * LOG_2PI
        + 0.5 * math.log(lam0 / lam_n)
        + a0 * math.log(b0)
        - a_n * math.log(b_n)
        + math.lgamma(a_n)
        - math.lgamma(a0)
    )


def predictive_log_ratio(stats: ClusterSuffStats, y: float, prior: NIGPrior) -> float:
    """log( m(C + {y}) / m(C) ): the Student-t posterior predictive log density at ``y``."""
    if not math.isfinite(y):
        raise InvalidInputError("non-finite observation")
    if not (math.isfinite(stats.sum) and math.isfinite(stats.sumsq)):
        raise InvalidInputError("non-finite sufficient statistics")
    mu0, lam0, a0, b0 = prior.as_tuple()
    mu_n, lam_n, a_n, b_n = _posterior_params(stats.n, stats.sum, stats.sumsq, mu0, lam0, a0, b0)
    b_new = b_n + lam_n * (y - mu_n) ** 2 / (2.0 * (lam_n + 1.0))
    return (
        -0.5 * LOG_2PI
        + 0.5 * math.log(lam_n / (lam_n + 1.0))
        + a_n * math.log(b_n)
        - (a_n + 0.5) * math.log(b_new)
        + math.lgamma(a_n + 0.5)
        - math.lgamma(a_n)
    )


def hyperparams_from_data(y, scale: float = 1.0) -> NIGPrior:
    """Empirical (Raftery-style) hyperparameters.

    a0 = 1.28, b0 = 0.36 * (mean(y^2) - mean(y)^2), mu0 = mean(y),
    1/lambda0 = (max(y) - min(y)) / 2.6.

    ``scale`` multiplies the data before the rule is applied; the estimators
    must then be run on the same scaled data.
    """
    y = np.asarray(y, dtype=float).ravel() * float(scale)
    if y.size < 2 or np.unique(y).size < 2:
        raise DegenerateDataError("at least two distinct observations are needed (b0 would be 0)")
    mean = float(np.mean(y))
    var = float(np.mean(y * y) - mean * mean)
    if not var > 0:
        raise DegenerateDataError("zero empirical variance")
    return NIGPrior(mu0=mean, lambda0=2.6 / float(np.max(y) - np.min(y)), a0=1.28, b0=0.36 * var)


# ---------------------------------------------------------------------------
# vectorised forms (arrays of clusters)


def log_marginal_array(n, s, ss, prior: NIGPrior) -> np.ndarray:
    """Elementwise log m(C) for arrays of sufficient statistics (0 where n == 0)."""
    mu0, lam0, a0, b0 = prior.as_tuple()
    n = np.asarray(n, dtype=float)
    s = np.asarray(s, dtype=float)
    ss = np.asarray(ss, dtype=float)
    nz = np.maximum(n, 1.0)
    mean = s / nz
    scatter = np.maximum(ss - s * mean, 0.0)
    lam_n = lam0 + n
    a_n = a0 + 0.5 * n
    b_n = b0 + 0.5 * scatter + lam0 * n * (mean - mu0) ** 2 / (2.0 * lam_n)
    out = (
        -0.5 * n * LOG_2PI
        + 0.5 * np.log(lam0 / lam_n)
        + a0 * math.log(b0)
        - a_n * np.log(b_n)
        + gammaln(a_n)
        - math.lgamma(a0)
    )
    return np.where(n > 0, out, 0.0)


def posterior_params_array(n, s, ss, prior: NIGPrior):
    """Vectorised NIG posterior parameters ``(mu_n, lambda_n, a_n, b_n)``."""
    mu0, lam0, a0, b0 = prior.as_tuple()
    n = np.asarray(n, dtype=float)
    s = np.asarray(s, dtype=float)
    ss = np.asarray(ss, dtype=float)
    nz = np.maximum(n, 1.0)
    mean = np.where(n > 0, s / nz, mu0)
    scatter = np.maximum(ss - s * (s / nz), 0.0)
    lam_n = lam0 + n
    mu_n = (lam0 * mu0 + s) / lam_n
    a_n = a0 + 0.5 * n
    b_n = b0 + 0.5 * scatter + lam0 * n * (mean - mu0) ** 2 / (2.0 * lam_n)
    return mu_n, lam_n, a_n, b_n


def log_predictive_array(n, s, ss, y, prior: NIGPrior) -> np.ndarray:
    """Elementwise log( m(C + {y}) / m(C) ); broadcasts ``y`` against the stats."""
    mu_n, lam_n, a_n, b_n = posterior_params_array(n, s, ss, prior)
    b_new = b_n + lam_n * (y - mu_n) ** 2 / (2.0 * (lam_n + 1.0))
    return (
        -0.5 * LOG_2PI
        + 0.5 * np.log(lam_n / (lam_n + 1.0))
        + a_n * np.log(b_n)
        - (a_n + 0.5) * np.log(b_new)
        + gammaln(a_n + 0.5)
        - gammaln(a_n)
    )


def log_nig_density(mu, sigma2, mu_n, lam_n, a_n, b_n) -> np.ndarray:
    """log NIG(mu, sigma2 | mu_n, lam_n, a_n, b_n) with respect to d mu d sigma2."""
    log_ig = a_n * np.log(b_n) - gammaln(a_n) - (a_n + 1.0) * np.log(sigma2) - b_n / sigma2
    log_norm = -0.5 * (LOG_2PI + np.log(sigma2 / lam_n)) - lam_n * (mu - mu_n) ** 2 / (2.0 * sigma2)
    return log_ig + log_norm


# ---------------------------------------------------------------------------
# compiled scalar kernels for the sequential samplers


@njit(cache=True)
def nb_log_marginal(n, s, ss, mu0, lam0, a0, b0):
    if n == 0:
        return 0.0
    mean = s / n
    scatter = ss - s * mean
    if scatter < 0.0:
        scatter = 0.0
    lam_n = lam0 + n
    a_n = a0 + 0.5 * n
    b_n = b0 + 0.5 * scatter + lam0 * n * (mean - mu0) ** 2 / (2.0 * lam_n)
    return (
        -0.5 * n * 1.8378770664093453
        + 0.5 * math.log(lam0 / lam_n)
        + a0 * math.log(b0)
        - a_n * math.log(b_n)
        + math.lgamma(a_n)
        - math.lgamma(a0)
    )


@njit(cache=True)
def nb_log_predictive(n, s, ss, y, mu0, lam0, a0, b0):
    lam_n = lam0 + n
    a_n = a0 + 0.5 * n
    if n == 0:
        mu_n = mu0
        b_n = b0
    else:
        mean = s / n
        scatter = ss - s * mean
        if scatter < 0.0:
            scatter = 0.0
        mu_n = (lam0 * mu0 + s) / lam_n
        b_n = b0 + 0.5 * scatter + lam0 * n * (mean - mu0) ** 2 / (2.0 * lam_n)
    b_new = b_n + lam_n * (y - mu_n) ** 2 / (2.0 * (lam_n + 1.0))
    return (
        -0.9189385332046727
        + 0.5 * math.log(lam_n / (lam_n + 1.0))
        + a_n * math.log(b_n)
        - (a_n + 0.5) * math.log(b_new)
        + math.lgamma(a_n + 0.5)
        - math.lgamma(a_n)
    )
