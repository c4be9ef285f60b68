"""Run configuration: validation, per-model defaults and JSON round-tripping.

The resolved configuration is serialized verbatim into every output directory;
re-running from that file reproduces the run byte-for-byte.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["RunConfig", "ConfigError"]

MODEL_DEFAULTS = {
    # (budget, optimizer, learning_rate)
    "quadratic": (3000, "gd", 1e-2),
    "logistic": (4000, "adam", 0.1),
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    model: str = "quadratic"
    out_dir: str = "runs/out"
    seed: int = 0
    n_seeds: int = 1
    budget: int | None = None
    optimizer: str | None = None
    learning_rate: float | None = None
    kappa: float = 1.0
    # main criterion
    gradstop_mode: str = "deterministic"
    gradstop_u: float = 0.1
    # baseline criteria
    baseline_patience: int = 5
    # validation-set criterion
    validation: bool = True
    validation_rule: str = "argmin"
    # quadratic model
    quadratic_dim: int = 50
    quadratic_samples: int = 200
    spectrum_min: float = 0.1
    spectrum_max: float = 10.0
    # logistic model
    dataset_path: str | None = None
    label_column: str | None = None
    positive_label: str | None = None
    synthetic: str = "overfit"
    prior_precision: float = 1e-2
    test_fraction: float = 0.20
    # posterior-sampling comparison (uncertainty command)
    mcmc_samples: int = 5000
    mcmc_burn_in: int = 10_000
    mcmc_thin: int = 10
    mcmc_step_scale: float | None = None
    # sweep command
    u_grid: list[float] = field(default_factory=list)

    def validate(self) -> "RunConfig":
        if self.model not in MODEL_DEFAULTS:
            raise ConfigError(f"unknown model {self.model!r}")
        if self.optimizer is not None and self.optimizer not in ("gd", "adam"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        if self.budget is not None and self.budget < 1:
            raise ConfigError(f"budget must be >= 1, got {self.budget}")
        if self.learning_rate is not None and self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.kappa <= 0:
            raise ConfigError(f"kappa must be positive, got {self.kappa}")
        if self.gradstop_mode not in ("deterministic", "stochastic"):
            raise ConfigError(f"unknown gradstop mode {self.gradstop_mode!r}")
        if not 0.0 <= self.gradstop_u <= 1.0:
            raise ConfigError(f"gradstop_u must be in [0, 1], got {self.gradstop_u}")
        if self.baseline_patience < 1:
            raise ConfigError("baseline_patience must be >= 1")
        if self.validation_rule not in ("argmin", "patience"):
            raise ConfigError(f"unknown validation rule {self.validation_rule!r}")
        if self.n_seeds < 1:
            raise ConfigError("n_seeds must be >= 1")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must be in (0, 1)")
        if self.quadratic_dim < 1 or self.quadratic_samples < 2:
            raise ConfigError("quadratic model needs dim >= 1 and n_samples >= 2")
        if not 0 < self.spectrum_min <= self.spectrum_max:
            raise ConfigError("spectrum range must satisfy 0 < min <= max")
        if self.model == "logistic" and self.dataset_path is not None:
            if self.label_column is None or self.positive_label is None:
                raise ConfigError(
                    "CSV datasets need label_column and positive_label"
                )
        if self.model == "logistic" and self.dataset_path is None:
            if self.synthetic not in ("overfit", "mcmc-fixture"):
                raise ConfigError(f"unknown synthetic dataset {self.synthetic!r}")
        if any(not 0.0 <= u <= 1.0 for u in self.u_grid):
            raise ConfigError("u_grid values must lie in [0, 1]")
        return self

    # resolved (per-model default) values -------------------------------------
    @property
    def resolved_budget(self) -> int:
        return self.budget if self.budget is not None else MODEL_DEFAULTS[self.model][0]

    @property
    def resolved_optimizer(self) -> str:
        return self.optimizer if self.optimizer is not None else MODEL_DEFAULTS[self.model][1]

    @property
    def resolved_learning_rate(self) -> float:
        if self.learning_rate is not None:
            return self.learning_rate
        return MODEL_DEFAULTS[self.model][2]

    @property
    def fractions(self) -> tuple[float, float, float]:
        """(train, val, test) fractions: test is fixed, validation takes 20% of
        the remainder when the validation criterion is enabled."""
        test = self.test_fraction
        val = 0.2 * (1.0 - test) if self.validation else 0.0
        return (1.0 - test - val, val, test)

    def seeds(self) -> list[int]:
        return [self.seed + i for i in range(self.n_seeds)]

    # serialization ------------------------------------------------------------
    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ConfigError("config JSON must be an object")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data).validate()

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        return cls.from_json(Path(path).read_text(encoding="utf-8"))

    def write(self, path) -> None:
        Path(path).write_text(self.to_json(), encoding="utf-8")
