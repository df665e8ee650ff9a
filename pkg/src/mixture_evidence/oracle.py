"""Exact evidences by brute-force enumeration, for tiny instances.

These are ground truth for the Monte Carlo estimators and are deliberately
written along independent paths (allocation enumeration vs set-partition
enumeration) so that each can check the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln, logsumexp

from .conjugate import NIGPrior, log_marginal_array
from .dpm_core import GammaPrior
from .exceptions import ConvergenceError, GuardError, InvalidInputError
from .fm_core import _as_alpha, allocation_stats
from .partitions import bell_number, cluster_stats, log_partition_prior, set_partitions

MAX_ALLOCATIONS = 10**7
MAX_PARTITIONS = 10**5


def _allocation_chunks(n: int, K: int, chunk: int = 1 << 16):
    total = K**n
    powers = K ** np.arange(n, dtype=np.int64)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield (idx[:, None] // powers[None, :]) % K


def fm_exact_evidence_allocations(data, K: int, prior: NIGPrior, alpha) -> float:
    """log sum over z in {0..K-1}^n of Dirichlet-multinomial(z) * p(y | z)."""
    data = np.asarray(data, dtype=float).ravel()
    n = data.size
    alpha = _as_alpha(alpha, K)
    if K**n > MAX_ALLOCATIONS:
        raise GuardError(f"K^n = {K}^{n} exceeds the enumeration guard {MAX_ALLOCATIONS}")
    if n == 0:
        return 0.0
    parts = []
    const = gammaln(alpha.sum()) - gammaln(alpha.sum() + n) - gammaln(alpha).sum()
    for Z in _allocation_chunks(n, K):
        c, s, ss = allocation_stats(Z, data, K)
        lp = const + gammaln(c + alpha).sum(axis=1)
        ll = log_marginal_array(c, s, ss, prior).sum(axis=1)
        parts.append(logsumexp(lp + ll))
    return float(logsumexp(parts))


def fm_partition_table(data, K: int, prior: NIGPrior, alpha):
    """(canonical labels, log prior, log likelihood) for every partition with <= K blocks."""
    data = np.asarray(data, dtype=float).ravel()
    n = data.size
    if bell_number(max(n, 1)) > MAX_PARTITIONS and n > 0:
        raise GuardError(f"Bell({n}) exceeds the enumeration guard {MAX_PARTITIONS}")
    rows, lps, lls = [], [], []
    for z in set_partitions(n, K):
        rows.append(tuple(z))
        lps.append(log_partition_prior(z, alpha))
        c, s, ss = cluster_stats(z, data)
        lls.append(float(np.sum(log_marginal_array(c, s, ss, prior))))
    return rows, np.array(lps), np.array(lls)


def fm_exact_evidence_partitions(data, K: int, prior: NIGPrior, alpha) -> float:
    """log sum over partitions with at most K blocks of pi_K(C) p(y | C)."""
    if np.asarray(data).size == 0:
        return 0.0
    _, lp, ll = fm_partition_table(data, K, prior, _as_alpha(alpha, K))
    return float(logsumexp(lp + ll))


def fm_exact_evidence(data, K: int, prior: NIGPrior, alpha, check: bool = True) -> float:
    """Exact finite-mixture log evidence; cross-checks both enumeration routes when feasible."""
    a = fm_exact_evidence_allocations(data, K, prior, alpha)
    n = np.asarray(data).size
    if check and n > 0 and bell_number(n) <= MAX_PARTITIONS:
        b = fm_exact_evidence_partitions(data, K, prior, alpha)
        if abs(a - b) > 1e-9 * max(1.0, abs(a)):
            raise AssertionError(f"enumeration routes disagree: {a} vs {b}")
    return a


def fm_exact_partition_posterior(data, K: int, prior: NIGPrior, alpha) -> dict:
    """Posterior probability of every canonical partition with at most K blocks."""
    rows, lp, ll = fm_partition_table(data, K, prior, _as_alpha(alpha, K))
    lw = lp + ll
    p = np.exp(lw - logsumexp(lw))
    return dict(zip(rows, p))


# ---------------------------------------------------------------------------
# Dirichlet process mixture


@dataclass(frozen=True)
class DPMPartitionSums:
    """log c_k = log sum over partitions with k blocks of prod_j Gamma(n_j) * p(y | C)."""

    n: int
    log_ck: np.ndarray  # index k - 1

    def log_evidence_at(self, M):
        """log L(y | M, G0) for scalar or array M."""
        M = np.asarray(M, dtype=float)
        k = np.arange(1, self.log_ck.size + 1)
        inner = logsumexp(self.log_ck + np.log(M)[..., None] * k, axis=-1)
        return gammaln(M) - gammaln(M + self.n) + inner


def dpm_partition_sums(data, prior: NIGPrior, max_partitions: int = MAX_PARTITIONS) -> DPMPartitionSums:
    data = np.asarray(data, dtype=float).ravel()
    n = data.size
    if n == 0:
        raise InvalidInputError("empty data")
    if bell_number(n) > max_partitions:
        raise GuardError(f"Bell({n}) = {bell_number(n)} exceeds the enumeration guard {max_partitions}")
    buckets = [[] for _ in range(n)]
    for z in set_partitions(n):
        c, s, ss = cluster_stats(z, data)
        val = float(np.sum(gammaln(c)) + np.sum(log_marginal_array(c, s, ss, prior)))
        buckets[c.size - 1].append(val)
    log_ck = np.array([logsumexp(b) if b else -np.inf for b in buckets])
    return DPMPartitionSums(n, log_ck)


def dpm_fixed_m_evidence(data, M: float, prior: NIGPrior) -> float:
    """log L(y | M, G0) by summing the Polya-urn prior times likelihood over all set partitions."""
    if not M > 0:
        raise InvalidInputError("M must be positive")
    return float(dpm_partition_sums(data, prior).log_evidence_at(M))


def gauss_laguerre(n_nodes: int, alpha: float):
    """Nodes and log-weights of generalized Gauss-Laguerre quadrature (Golub-Welsch).

    Approximates int_0^inf x^alpha e^-x f(x) dx by sum_i exp(logw_i) f(x_i).
    """
    if alpha <= -1:
        raise InvalidInputError("alpha must exceed -1")
    k = np.arange(n_nodes, dtype=float)
    diag = 2.0 * k + alpha + 1.0
    off = np.sqrt(k[1:] * (k[1:] + alpha))
    x, V = eigh_tridiagonal(diag, off)
    with np.errstate(divide="ignore"):
        logw = math.lgamma(alpha + 1.0) + 2.0 * np.log(np.abs(V[0, :]))
    return x, logw


def _gamma_quadrature(log_f, gprior: GammaPrior, n_nodes: int) -> float:
    x, logw = gauss_laguerre(n_nodes, gprior.a - 1.0)
    keep = np.isfinite(logw) & (x > 0)
    M = x[keep] / gprior.b
    return float(logsumexp(logw[keep] + log_f(M)) - math.lgamma(gprior.a))


def dpm_exact_evidence(data, prior: NIGPrior, gprior: GammaPrior, quad_nodes: int = 200, tol: float = 1e-8) -> float:
    """log int L(y | M, G0) Gamma(M | a, b) dM with a node-doubling convergence check."""
    sums = dpm_partition_sums(data, prior)
    v1 = _gamma_quadrature(sums.log_evidence_at, gprior, quad_nodes)
    v2 = _gamma_quadrature(sums.log_evidence_at, gprior, 2 * quad_nodes)
    if not abs(v1 - v2) < tol:
        raise ConvergenceError(
            f"Gauss-Laguerre quadrature not converged ({quad_nodes}: {v1}, {2 * quad_nodes}: {v2})",
            trace=[v1, v2],
        )
    return v2


def dpm_exact_posterior(data, prior: NIGPrior, gprior: GammaPrior, quad_nodes: int = 400) -> dict:
    """Exact posterior summaries: log evidence, E[M | y], E[M^2 | y] and P(K+ = k | y)."""
    sums = dpm_partition_sums(data, prior)
    x, logw = gauss_laguerre(quad_nodes, gprior.a - 1.0)
    keep = np.isfinite(logw) & (x > 0)
    M = x[keep] / gprior.b
    lw = logw[keep] - math.lgamma(gprior.a)
    lf = sums.log_evidence_at(M)
    logZ = logsumexp(lw + lf)
    post = np.exp(lw + lf - logZ)
    k = np.arange(1, sums.log_ck.size + 1)
    # P(K+ = k | y) = int Gamma(M)/Gamma(M+n) M^k c_k pi(M) dM / Z
    lk = gammaln(M)[:, None] - gammaln(M + sums.n)[:, None] + np.log(M)[:, None] * k + sums.log_ck[None, :]
    pk = np.exp(logsumexp(lw[:, None] + lk, axis=0) - logZ)
    return {
        "log_evidence": float(logZ),
        "mean_M": float(np.sum(post * M)),
        "mean_M2": float(np.sum(post * M * M)),
        "p_blocks": pk,
    }


def dpm_exact_partition_posterior_fixed_m(data, M: float, prior: NIGPrior) -> dict:
    """Posterior over canonical partitions at a fixed concentration M."""
    data = np.asarray(data, dtype=float).ravel()
    rows, lw = [], []
    for z in set_partitions(data.size):
        c, s, ss = cluster_stats(z, data)
        rows.append(tuple(z))
        lw.append(c.size * math.log(M) + float(np.sum(gammaln(c))) + float(np.sum(log_marginal_array(c, s, ss, prior))))
    lw = np.array(lw)
    p = np.exp(lw - logsumexp(lw))
    return dict(zip(rows, p))
