"""Named tuning presets.

Each preset fixes the model, dataset and per-estimator tuning of one
published experiment configuration. Galaxy velocities are expressed in
units of 1000 km/s (``data_scale = 1e-3``) before the empirical prior rule
is applied.
"""

from __future__ import annotations

import copy

from ..exceptions import ConfigError
from .data import SIX_COMPONENT

GALAXY_SCALE = 1e-3


def _galaxy_fm(K, chib_T, chib_burn, sis_T, am_T, with_perm_bridge):
    tuning = {
        "chib": {"T": chib_T, "burnin": chib_burn},
        "chib-partition": {"T": chib_T, "burnin": chib_burn},
        "smc": {"N": 10000, "M_moves": 10},
        "sis": {"T": sis_T},
        "am": {"T": am_T},
        "hm": {"T": chib_T, "burnin": chib_burn},
        "chib-randperm": {"T": chib_T, "burnin": chib_burn, "R": 100},
    }
    if with_perm_bridge:
        tuning["chib-perm"] = {"T": chib_T, "burnin": chib_burn}
        tuning["bridge"] = {"T0": 100, "T1": 12000, "T2": 12000, "burnin": 5000}
    return {"model": "fm", "K": K, "dataset": "galaxy", "data_scale": GALAXY_SCALE, "tuning": tuning}


def _sis_only(K, T):
    return {"model": "fm", "K": K, "dataset": "galaxy", "data_scale": GALAXY_SCALE, "tuning": {"sis": {"T": T}}}


def _synth(n, K, sis_T, partition, bridge):
    tuning = {"smc": {"N": 20000, "M_moves": 10}, "sis": {"T": sis_T}}
    if partition:
        tuning["chib-partition"] = {"T": 10**5, "burnin": 10**4}
    if bridge:
        tuning["bridge"] = {"T0": 100, "T1": 12000, "T2": 12000, "burnin": 5000}
    return {
        "model": "fm",
        "K": K,
        "dataset": {"synthetic": dict(SIX_COMPONENT, n=n, seed=2000 + n)},
        "data_scale": 1.0,
        "tuning": tuning,
    }


def _galaxy_dpm(n, T1, burnin, rlr_prior_T2, am_T):
    return {
        "model": "dpm",
        "dataset": "galaxy",
        "subset": n,
        "data_scale": GALAXY_SCALE,
        "tuning": {
            "chib-dpm": {"T1": T1, "burnin": burnin, "T2": 2000},
            "rlr-sis": {"T1": T1, "burnin": burnin, "T2": 2000},
            "rlr-prior": {"T1": T1, "burnin": burnin, "T2": rlr_prior_T2},
            "dpm-hm": {"T": T1, "burnin": burnin},
            "dpm-am": {"T": am_T},
        },
    }


PRESETS = {
    "galaxy-k3": _galaxy_fm(3, 10**5, 10**4, 10**3, 3 * 10**6, True),
    "galaxy-k5": _galaxy_fm(5, 10**5, 10**4, 6000, 3 * 10**6, True),
    "galaxy-k6": _galaxy_fm(6, 2 * 10**5, 2 * 10**4, 7000, 3 * 10**6, False),
    "galaxy-k8": _galaxy_fm(8, 3 * 10**5, 3 * 10**4, 10**4, 4 * 10**6, False),
    # K-scan values not tabulated are taken from the nearest tabulated K (ties: the larger K)
    "galaxy-k2": _sis_only(2, 10**3),
    "galaxy-k4": _sis_only(4, 6000),
    "galaxy-k7": _sis_only(7, 10**4),
    "synth-n1000-k3": _synth(1000, 3, 2000, True, True),
    "synth-n1000-k13": _synth(1000, 13, 2000, False, False),
    "synth-n2000-k3": _synth(2000, 3, 10**4, False, True),
    "synth-n2000-k13": _synth(2000, 13, 10**4, False, False),
    "galaxy-dpm-n6": _galaxy_dpm(6, 3 * 10**4, 2000, 28000, 3 * 10**4),
    "galaxy-dpm-n36": _galaxy_dpm(36, 5 * 10**4, 5000, 45000, 2 * 10**5),
    "galaxy-dpm-n82": _galaxy_dpm(82, 10**5, 10**4, 90000, 5 * 10**5),
}

# SIS budget per K for the galaxy model-selection scan
GALAXY_SIS_SCAN = {2: 10**3, 3: 10**3, 4: 6000, 5: 6000, 6: 7000, 7: 10**4, 8: 10**4}


def get_preset(name: str) -> dict:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return copy.deepcopy(PRESETS[name])


def preset_tuning(name: str, estimator: str) -> dict:
    p = get_preset(name)
    if estimator not in p["tuning"]:
        raise ConfigError(f"preset {name!r} has no tuning for estimator {estimator!r}")
    return p["tuning"][estimator]
