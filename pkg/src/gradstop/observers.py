"""Concrete training-loop observers: the main criterion, the baseline rules,
and the loss/validation logger.

Observers are read-only over (t, theta, G); controllers copy any parameters
they retain. Statistics keep being recorded after a criterion has fired so the
trace always covers the full budget.
"""

from __future__ import annotations

import math

import numpy as np

from .baselines import (
    BaselineName,
    BaselineStopRule,
    rule_step,
    stat_cos,
    stat_eb,
    stat_gd,
    stat_gsnr,
    stat_sign,
)
from .criterion import Decision, StopController, credible_value
from .models import LogisticModel
from .numstats import DegenerateCovariance
from .optim import Observer

__all__ = ["CredibilityObserver", "BaselineObserver", "LossObserver"]


class CredibilityObserver(Observer):
    """Records z and s_hat each iteration and feeds a stopping controller.

    A degenerate covariance marks the iteration (missing statistic, flag set)
    and training continues. When an exact posterior is available (synthetic
    quadratic runs) the closed-form credibility is recorded alongside.
    """

    def __init__(self, controller: StopController | None = None, kappa: float = 1.0,
                 posterior=None):
        self.controller = controller
        self.kappa = kappa
        self.posterior = posterior
        self._last_t = 0

    def observe(self, t, theta, G):
        self._last_t = t
        record: dict = {}
        if self.posterior is not None:
            record["exact_s"] = self.posterior.credibility(theta)
        try:
            cv = credible_value(G, kappa=self.kappa, iteration=t)
        except DegenerateCovariance:
            record["flags"] = "degenerate_covariance"
            return record
        record["z"] = cv.z
        record["s_hat"] = cv.s_hat
        if self.controller is not None and not self.controller.stopped:
            self.controller.observe(theta, cv)
        return record

    def outcomes(self):
        if self.controller is None:
            return {}
        iteration = self.controller.best_iteration
        if iteration is None:
            # deterministic threshold never reached (or nothing valid observed):
            # the run ends at the budget
            iteration = self._last_t
        return {"gradstop": iteration}


class BaselineObserver(Observer):
    """Computes one baseline statistic per iteration and runs its stop rule.

    The gradient-disparity statistic uses a half/half sample split drawn once
    from ``split_seed`` at the first observation and fixed for the whole run.
    """

    def __init__(self, name: BaselineName | str, patience: int = 5, split_seed: int = 0):
        self.name = BaselineName(name)
        self.rule = BaselineStopRule(name=self.name, patience=patience)
        self.split_seed = split_seed
        self._halves: tuple[np.ndarray, np.ndarray] | None = None
        self._prev: float | None = None
        self._stop_iteration: int | None = None
        self._last_t = 0

    def _value(self, G: np.ndarray) -> float:
        if self.name is BaselineName.SIGN:
            return stat_sign(G)
        if self.name is BaselineName.COS:
            return stat_cos(G)
        if self.name is BaselineName.GSNR:
            return stat_gsnr(G)
        if self.name is BaselineName.EB:
            return stat_eb(G)
        if self._halves is None:
            n = G.shape[0]
            perm = np.random.default_rng(self.split_seed).permutation(n)
            self._halves = (perm[: n // 2], perm[n // 2 :])
        return stat_gd(G[self._halves[0]], G[self._halves[1]])

    def observe(self, t, theta, G):
        self._last_t = t
        value = self._value(G)
        if not self.rule.stopped:
            if rule_step(self.rule, self._prev, value) is Decision.STOP:
                self._stop_iteration = t
        self._prev = value
        return {self.name.value: value}

    def outcomes(self):
        iteration = self._stop_iteration if self._stop_iteration is not None else self._last_t
        return {self.name.value: iteration}


class LossObserver(Observer):
    """Logs train/validation/test losses (and accuracies for classifiers) and
    implements the validation-set stopping baseline.

    The default validation rule is the retrospective argmin of the validation
    loss over the budget; ``rule="patience"`` instead stops on the fifth
    increase, mirroring the counting rules of the gradient baselines.
    """

    def __init__(
        self,
        model,
        test: tuple[np.ndarray, np.ndarray] | None = None,
        validation: tuple[np.ndarray, np.ndarray] | None = None,
        rule: str = "argmin",
        patience: int = 5,
    ):
        if rule not in ("argmin", "patience"):
            raise ValueError(f"unknown validation rule {rule!r}")
        self.model = model
        self.test = test
        self.validation = validation
        self.rule = rule
        self.patience = patience
        self._is_classifier = isinstance(model, LogisticModel)
        self._best_val = math.inf
        self._best_iteration: int | None = None
        self._prev_val = math.inf
        self._increases = 0
        self._patience_stop: int | None = None
        self._last_t = 0

    def observe(self, t, theta, G):
        self._last_t = t
        record = {"train_loss": self.model.total_loss(theta) / self.model.n_samples}
        if self._is_classifier:
            record["train_acc"] = self.model.accuracy(
                self.model.features, self.model.labels, theta
            )
            if self.test is not None:
                record["test_loss"] = self.model.mean_nll(*self.test, theta)
                record["test_acc"] = self.model.accuracy(*self.test, theta)
            if self.validation is not None:
                val = self.model.mean_nll(*self.validation, theta)
                record["val_loss"] = val
                if val < self._best_val:
                    self._best_val = val
                    self._best_iteration = t
                if self._patience_stop is None and val > self._prev_val:
                    self._increases += 1
                    if self._increases >= self.patience:
                        self._patience_stop = t
                self._prev_val = val
        return record

    def outcomes(self):
        if self.validation is None:
            return {}
        if self.rule == "patience":
            iteration = self._patience_stop if self._patience_stop is not None else self._last_t
        else:
            iteration = self._best_iteration if self._best_iteration is not None else self._last_t
        return {"validation": iteration}
