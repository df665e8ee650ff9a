"""Run configuration: merging of presets, config files and CLI flags, then validation."""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass, field, fields

from ..conjugate import NIGPrior
from ..dpm_core import GammaPrior
from ..dpm_evidence import DPM_ESTIMATORS
from ..exceptions import ConfigError, InvalidInputError
from ..fm_evidence import FM_ESTIMATORS
from .data import SyntheticSpec
from .presets import get_preset

WORKERS_ENV = "EVIDENCE_WORKERS"


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            w = int(env)
        except ValueError:
            raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
        if w < 1:
            raise ConfigError(f"{WORKERS_ENV} must be positive")
        return w
    return os.cpu_count() or 1


@dataclass
class RunConfig:
    model: str
    estimator: str
    dataset: object
    K: int | None = None
    tuning: dict = field(default_factory=dict)
    data_scale: float = 1.0
    subset: int | None = None
    prior: object = "raftery"
    alpha: float = 1.0
    gamma_prior: dict = field(default_factory=lambda: {"a": 1.0, "b": 1.0})
    reps: int = 1
    seed: int = 0
    out: str | None = None
    workers: int | None = None
    preset: str | None = None
    reference: float | None = None
    mse_out: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        """Build a config; preset values fill anything the caller left unset."""
        names = {f.name for f in fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        d = {k: v for k, v in d.items() if v is not None}
        if "preset" in d:
            p = get_preset(d["preset"])
            est = d.get("estimator")
            base = {k: v for k, v in p.items() if k != "tuning"}
            if est is not None and est in p["tuning"]:
                base["tuning"] = dict(p["tuning"][est])
            merged = {**base, **{k: v for k, v in d.items() if k != "tuning"}}
            merged["tuning"] = {**base.get("tuning", {}), **d.get("tuning", {})}
            d = merged
        missing = [k for k in ("model", "estimator", "dataset") if k not in d]
        if missing:
            raise ConfigError(f"missing required configuration keys: {missing}")
        cfg = cls(**d)
        cfg.validate()
        return cfg

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)

    def validate(self) -> None:
        if self.model not in ("fm", "dpm"):
            raise ConfigError(f"model must be 'fm' or 'dpm', got {self.model!r}")
        valid = FM_ESTIMATORS if self.model == "fm" else DPM_ESTIMATORS
        if self.estimator not in valid:
            raise ConfigError(f"estimator {self.estimator!r} is not available for model {self.model!r}: {valid}")
        if self.model == "fm":
            if not isinstance(self.K, int) or isinstance(self.K, bool) or self.K < 1:
                raise ConfigError("finite-mixture runs need a positive integer K")
        if not isinstance(self.reps, int) or self.reps < 1:
            raise ConfigError("reps must be a positive integer")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.workers is not None and (not isinstance(self.workers, int) or self.workers < 1):
            raise ConfigError("workers must be a positive integer")
        if not (isinstance(self.data_scale, (int, float)) and self.data_scale > 0 and math.isfinite(self.data_scale)):
            raise ConfigError("data_scale must be a positive number")
        if self.subset is not None and (not isinstance(self.subset, int) or self.subset < 1):
            raise ConfigError("subset must be a positive integer")
        if not isinstance(self.tuning, dict):
            raise ConfigError("tuning must be a mapping")
        if isinstance(self.dataset, dict):
            if set(self.dataset) != {"synthetic"}:
                raise ConfigError("a dataset mapping must have the single key 'synthetic'")
            SyntheticSpec.from_dict(self.dataset["synthetic"])
        elif not isinstance(self.dataset, str):
            raise ConfigError("dataset must be a path, a built-in name or {'synthetic': {...}}")
        try:
            if isinstance(self.prior, dict):
                NIGPrior(**self.prior)
            elif self.prior != "raftery":
                raise ConfigError("prior must be 'raftery' or an explicit {mu0, lambda0, a0, b0} mapping")
            if not (isinstance(self.alpha, (int, float)) and self.alpha > 0):
                raise ConfigError("alpha must be positive")
            GammaPrior(**self.gamma_prior)
        except (TypeError, InvalidInputError) as exc:
            raise ConfigError(str(exc)) from None

    def resolved_workers(self) -> int:
        return self.workers if self.workers is not None else default_workers()
