"""Allocation vectors, their label-free partitions, and closed-form partition terms.

Labels are arbitrary integers on input. Canonical forms renumber clusters
0, 1, 2, ... in order of first appearance, so two allocations induce the same
grouping of the observations iff their canonical forms are equal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .conjugate import NIGPrior, log_marginal_array
from .exceptions import InvalidInputError


@dataclass(frozen=True)
class CanonicalPartition:
    labels: tuple
    block_sizes: tuple  # sorted, descending

    @property
    def n_blocks(self) -> int:
        return len(self.block_sizes)


def canonical_labels(z) -> np.ndarray:
    """First-appearance relabelling of one allocation vector (0-based)."""
    z = np.asarray(z).ravel()
    _, first, inverse = np.unique(z, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    return rank[inverse.ravel()]


def canonicalize(z) -> CanonicalPartition:
    labels = canonical_labels(z)
    sizes = np.bincount(labels) if labels.size else np.zeros(0, dtype=int)
    return CanonicalPartition(tuple(int(v) for v in labels), tuple(sorted((int(s) for s in sizes), reverse=True)))


def canonical_labels_batch(Z, n_labels: int | None = None) -> np.ndarray:
    """Row-wise first-appearance relabelling of a (T, n) array of allocations.

    Labels must be nonnegative integers below ``n_labels``.
    """
    Z = np.asarray(Z, dtype=np.int64)
    T, n = Z.shape
    if n_labels is None:
        n_labels = int(Z.max()) + 1 if Z.size else 1
    first = np.full((T, n_labels), n, dtype=np.int64)
    rows = np.repeat(np.arange(T), n)
    cols = np.tile(np.arange(n), T)
    # reverse order so the earliest index is the one that sticks
    np.minimum.at(first, (rows[::-1], Z.ravel()[::-1]), cols[::-1])
    order = np.argsort(first, axis=1, kind="stable")
    rank = np.empty_like(order)
    np.put_along_axis(rank, order, np.arange(n_labels)[None, :].repeat(T, axis=0), axis=1)
    return np.take_along_axis(rank, Z, axis=1)


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    """Stirling number of the second kind, exact."""
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    # iterative row build avoids deep recursion for n in the hundreds
    row = [1] + [0] * k
    for m in range(1, n + 1):
        new = [0] * (k + 1)
        for j in range(1, min(m, k) + 1):
            new[j] = j * row[j] + row[j - 1]
        row = new
    return row[k]


def partitions_count(n: int, K: int) -> int:
    """Number of partitions of an n-set into at most K nonempty blocks."""
    if n < 1 or K < 1:
        raise InvalidInputError("n and K must be positive")
    row = [1] + [0] * K  # S(0, j)
    for m in range(1, n + 1):
        new = [0] * (K + 1)
        for j in range(1, min(m, K) + 1):
            new[j] = j * row[j] + row[j - 1]
        row = new
    return sum(row[1:])


def bell_number(n: int) -> int:
    return partitions_count(n, n) if n >= 1 else 1


def set_partitions(n: int, max_blocks: int | None = None):
    """Yield every restricted growth string of length n (one per set partition).

    Each yielded list is a canonical labelling; ``max_blocks`` caps the number
    of blocks.
    """
    if n == 0:
        yield []
        return
    kmax = n if max_blocks is None else min(n, max_blocks)
    a = [0] * n

    def rec(i, m):
        if i == n:
            yield list(a)
            return
        for v in range(min(m + 2, kmax)):
            a[i] = v
            yield from rec(i + 1, max(m, v))

    yield from rec(1, 0)


def _check_symmetric(alpha) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=float).ravel()
    if alpha.size == 0 or np.any(~(alpha > 0)):
        raise InvalidInputError("all Dirichlet parameters must be positive")
    if not np.all(alpha == alpha[0]):
        raise InvalidInputError(
            "asymmetric Dirichlet parameters do not define a label-invariant partition prior"
        )
    return alpha


def block_sizes(z) -> np.ndarray:
    labels = canonical_labels(z)
    return np.bincount(labels) if labels.size else np.zeros(0, dtype=int)


def log_partition_prior(z, alpha) -> float:
    """log pi_K(C(z)) under a symmetric Dirichlet(alpha) on K weights.

    K!/(K-K+)! * Gamma(sum alpha)/Gamma(sum alpha + n) * prod_j Gamma(n_j + a_j)/Gamma(a_j)
    """
    alpha = _check_symmetric(alpha)
    K = alpha.size
    sizes = block_sizes(z)
    k_plus = sizes.size
    n = int(sizes.sum())
    if k_plus > K:
        raise InvalidInputError(f"allocation has {k_plus} blocks but only K={K} labels")
    a = alpha[0]
    return float(
        math.lgamma(K + 1)
        - math.lgamma(K - k_plus + 1)
        + math.lgamma(K * a)
        - math.lgamma(K * a + n)
        + np.sum(gammaln(sizes + a) - math.lgamma(a))
    )


def log_allocation_prior(z, alpha) -> float:
    """Dirichlet-multinomial mass of a labelled allocation (no relabelling factor).

    Labels must index ``alpha`` directly (0-based), so asymmetric alpha is fine here.
    """
    alpha = np.asarray(alpha, dtype=float).ravel()
    if np.any(~(alpha > 0)):
        raise InvalidInputError("all Dirichlet parameters must be positive")
    z = np.asarray(z, dtype=np.int64).ravel()
    counts = np.bincount(z, minlength=alpha.size)
    if counts.size > alpha.size:
        raise InvalidInputError("label outside 0..K-1")
    return float(
        math.lgamma(alpha.sum())
        - math.lgamma(alpha.sum() + z.size)
        + np.sum(gammaln(counts + alpha) - gammaln(alpha))
    )


def cluster_stats(z, data):
    """Per-label (n, sum, sumsq) for a canonical or labelled allocation."""
    z = np.asarray(z, dtype=np.int64).ravel()
    data = np.asarray(data, dtype=float).ravel()
    if z.size != data.size:
        raise InvalidInputError(f"allocation length {z.size} != data length {data.size}")
    if z.size == 0:
        return np.zeros(0), np.zeros(0), np.zeros(0)
    counts = np.bincount(z).astype(float)
    sums = np.bincount(z, weights=data)
    sumsq = np.bincount(z, weights=data * data)
    return counts, sums, sumsq


def log_partition_likelihood(z, data, prior: NIGPrior) -> float:
    """log p(y | C(z)) = sum over occupied blocks of log m(C_k)."""
    labels = canonical_labels(z)
    n, s, ss = cluster_stats(labels, data)
    return float(np.sum(log_marginal_array(n, s, ss, prior)))
