"""Marginal likelihood (evidence) estimators for conjugate Gaussian mixtures.

Finite mixtures with K components and Dirichlet process mixtures, with a
normal / inverse-gamma prior on each component, plus exact brute-force
evidences for small datasets.
"""

from .conjugate import ClusterSuffStats, NIGPrior, cluster_log_marginal, hyperparams_from_data, predictive_log_ratio
from .dpm_core import DPMState, GammaPrior, dpm_gibbs_sweep, dpm_log_likelihood_z, dpm_log_prior_z, dpm_sis_impute
from .dpm_evidence import RLRSample, chib_dpm, rlr_evidence
from .fm_core import FMParams, GibbsState, fm_gibbs_sweep, fm_log_likelihood, fm_posterior_ordinate, fm_sample_prior
from .fm_evidence import (
    EvidenceEstimate,
    arithmetic_mean,
    bridge_sampling,
    chib,
    chib_partition,
    chib_permutation,
    harmonic_mean,
    sis_evidence,
    smc_evidence,
)
from .oracle import dpm_exact_evidence, fm_exact_evidence
from .partitions import canonicalize, log_partition_likelihood, log_partition_prior, partitions_count

__version__ = "0.1.0"

__all__ = [
    "ClusterSuffStats",
    "DPMState",
    "EvidenceEstimate",
    "FMParams",
    "GammaPrior",
    "GibbsState",
    "NIGPrior",
    "RLRSample",
    "arithmetic_mean",
    "bridge_sampling",
    "canonicalize",
    "chib",
    "chib_dpm",
    "chib_partition",
    "chib_permutation",
    "cluster_log_marginal",
    "dpm_exact_evidence",
    "dpm_gibbs_sweep",
    "dpm_log_likelihood_z",
    "dpm_log_prior_z",
    "dpm_sis_impute",
    "fm_exact_evidence",
    "fm_gibbs_sweep",
    "fm_log_likelihood",
    "fm_posterior_ordinate",
    "fm_sample_prior",
    "harmonic_mean",
    "hyperparams_from_data",
    "log_partition_likelihood",
    "log_partition_prior",
    "partitions_count",
    "predictive_log_ratio",
    "rlr_evidence",
    "sis_evidence",
    "smc_evidence",
]
