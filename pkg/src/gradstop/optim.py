"""Full-batch optimizers and the instrumented training loop.

The loop hands every iterate and its per-sample gradient matrix to a set of
read-only observers (stopping criteria, loss loggers) and advances the
parameters with the summed gradient - one gradient computation serves both the
optimizer and the criteria.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .trace import CriterionTrace

__all__ = ["AdamHyper", "OptimizerState", "Observer", "gd_step", "adam_step", "run"]


@dataclass
class AdamHyper:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass
class OptimizerState:
    theta: np.ndarray
    hyper: AdamHyper = field(default_factory=AdamHyper)
    step_count: int = 0
    adam_m: np.ndarray | None = None
    adam_v: np.ndarray | None = None

    def __post_init__(self):
        self.theta = np.array(self.theta, dtype=np.float64)
        if self.adam_m is None:
            self.adam_m = np.zeros_like(self.theta)
        if self.adam_v is None:
            self.adam_v = np.zeros_like(self.theta)


def gd_step(state: OptimizerState, total_gradient: np.ndarray, lr: float) -> OptimizerState:
    """Plain gradient descent: theta <- theta - lr * total_gradient."""
    if lr <= 0:
        raise ValueError(f"learning rate must be positive, got {lr}")
    state.theta -= lr * np.asarray(total_gradient, dtype=np.float64)
    state.step_count += 1
    return state


def adam_step(state: OptimizerState, total_gradient: np.ndarray) -> OptimizerState:
    """Bias-corrected Adam update using the state's hyperparameters."""
    h = state.hyper
    g = np.asarray(total_gradient, dtype=np.float64)
    state.step_count += 1
    t = state.step_count
    state.adam_m = h.beta1 * state.adam_m + (1.0 - h.beta1) * g
    state.adam_v = h.beta2 * state.adam_v + (1.0 - h.beta2) * g * g
    m_hat = state.adam_m / (1.0 - h.beta1**t)
    v_hat = state.adam_v / (1.0 - h.beta2**t)
    state.theta -= h.learning_rate * m_hat / (np.sqrt(v_hat) + h.eps)
    return state


class Observer:
    """Read-only consumer of (t, theta, G) during a training run.

    ``observe`` may return a mapping of trace-column values for iteration t;
    ``outcomes`` reports per-criterion stop/best iterations after the run.
    """

    def observe(self, t: int, theta: np.ndarray, G: np.ndarray) -> Mapping[str, object] | None:
        return None

    def outcomes(self) -> Mapping[str, int]:
        return {}


def run(
    model,
    theta0: np.ndarray,
    budget: int,
    observers: Sequence[Observer] = (),
    optimizer: str = "gd",
    learning_rate: float = 0.1,
    hyper: AdamHyper | None = None,
) -> CriterionTrace:
    """Run ``budget`` full-batch steps, feeding every observer each iteration.

    Iteration t (1-based) observes the parameters *before* the t-th update, so
    theta_1 is the initial point. Observers receive a non-writeable view of
    theta and must copy anything they retain. The returned trace contains one
    record per iteration plus every observer's outcome.
    """
    if int(budget) != budget or budget < 1:
        raise ValueError(f"budget must be a positive integer, got {budget}")
    if optimizer not in ("gd", "adam"):
        raise ValueError(f"unknown optimizer {optimizer!r}")
    if hyper is None:
        hyper = AdamHyper(learning_rate=learning_rate)
    state = OptimizerState(theta=theta0, hyper=hyper)
    if state.theta.shape != (model.dim,):
        raise ValueError(f"theta0 must have shape ({model.dim},)")
    records: list[dict] = []
    for t in range(1, int(budget) + 1):
        G = model.sample_gradients(state.theta)
        theta_view = state.theta.view()
        theta_view.flags.writeable = False
        record: dict = {"t": t}
        for obs in observers:
            out = obs.observe(t, theta_view, G)
            if out:
                record.update(out)
        records.append(record)
        total = G.sum(axis=0)
        if optimizer == "gd":
            gd_step(state, total, learning_rate)
        else:
            adam_step(state, total)
    outcomes: dict[str, int] = {}
    for obs in observers:
        outcomes.update(obs.outcomes())
    return CriterionTrace(records=records, outcomes=outcomes, final_theta=state.theta.copy())
