"""The gradient-statistics stopping criterion.

Three pieces: the credibility value s_hat = 1 - F_chi2_d(z) computed from a
per-sample gradient matrix, a stopping controller (stochastic target-matching
or deterministic first-crossing), and an uncertainty quantifier for scalar
functions of the parameters based on the same shrunk gradient covariance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .numstats import as_gradient_matrix, chi2_cdf, quad_stat, shrunk_solve

__all__ = [
    "CredibleValue",
    "Decision",
    "StopController",
    "UncertaintyEstimate",
    "credible_value",
    "uncertainty_of",
]


@dataclass(frozen=True)
class CredibleValue:
    """Estimated credibility value s_hat in [0, 1] and the statistic behind it."""

    s_hat: float
    z: float
    iteration: int = 0


class Decision(Enum):
    CONTINUE = "continue"
    NEW_BEST = "new_best"
    STOP = "stop"


def credible_value(G, *, kappa: float = 1.0, iteration: int = 0) -> CredibleValue:
    """Credibility value estimate from a per-sample gradient matrix.

    Computes z = kappa * n * g_bar' Sigma_hat^{-1} g_bar and returns
    s_hat = 1 - F_chi2_d(z) with d the parameter dimension. kappa rescales an
    arbitrary loss to a negative log-posterior; z scales linearly in it
    (kappa = 1 for an unscaled loss).

    Raises DegenerateCovariance when the gradient covariance is zero while the
    mean gradient is not.
    """
    if kappa <= 0.0 or not math.isfinite(kappa):
        raise ValueError(f"kappa must be a positive finite float, got {kappa}")
    G = as_gradient_matrix(G)
    d = G.shape[1]
    z = kappa * quad_stat(G).z
    return CredibleValue(s_hat=1.0 - chi2_cdf(z, d), z=z, iteration=iteration)


@dataclass
class StopController:
    """Tracks the best iterate against a credibility target u.

    Stochastic mode draws u ~ Uniform(0, 1) once (seeded) and keeps the iterate
    whose s_hat is closest to u over the whole budget; it never requests a stop
    by itself. Deterministic mode stops at the first iterate with s_hat >= u
    and must not be observed afterwards.

    Exactly one extra parameter copy (``best_theta``) is retained.
    """

    u: float
    deterministic: bool
    best_s: float = math.nan
    best_theta: np.ndarray | None = None
    best_iteration: int | None = None
    stopped: bool = False
    _best_dist: float = field(default=math.inf, repr=False)

    @classmethod
    def deterministic_threshold(cls, u: float) -> "StopController":
        """Stop at the first iteration whose credibility reaches u."""
        if not 0.0 <= u <= 1.0:
            raise ValueError(f"threshold u must be in [0, 1], got {u}")
        return cls(u=float(u), deterministic=True)

    @classmethod
    def stochastic(cls, seed: int) -> "StopController":
        """Match a uniform draw; the best iteration is known only after the
        full budget has been scanned."""
        u = float(np.random.default_rng(seed).uniform())
        return cls(u=u, deterministic=False)

    def observe(self, theta: np.ndarray, s: CredibleValue) -> Decision:
        """Feed one iterate; returns the bookkeeping decision.

        ``theta`` is copied when retained, so callers may reuse their buffer.
        """
        if self.stopped:
            raise RuntimeError("controller already stopped; observing is a contract violation")
        if self.deterministic:
            if s.s_hat >= self.u:
                self._retain(theta, s)
                self.stopped = True
                return Decision.STOP
            return Decision.CONTINUE
        dist = abs(s.s_hat - self.u)
        if dist < self._best_dist:
            self._best_dist = dist
            self._retain(theta, s)
            return Decision.NEW_BEST
        return Decision.CONTINUE

    def _retain(self, theta: np.ndarray, s: CredibleValue) -> None:
        self.best_s = s.s_hat
        self.best_theta = np.array(theta, dtype=np.float64, copy=True)
        self.best_iteration = s.iteration


@dataclass(frozen=True)
class UncertaintyEstimate:
    """Approximate posterior standard deviation of a scalar function."""

    sigma_f: float
    f_grad: np.ndarray


def uncertainty_of(f_grad, G, kappa: float = 1.0) -> UncertaintyEstimate:
    """Standard deviation of a scalar function f of the parameters under the
    approximate Gaussian posterior: sqrt(f' Sigma_hat^{-1} f' / (kappa * n)).

    G should be taken at a parameter near the loss minimum; the same shrunk
    covariance and inversion paths as quad_stat are used. Exactly linear in the
    scale of f_grad, and scales as 1/sqrt(kappa) in the loss scale.
    """
    if kappa <= 0.0 or not math.isfinite(kappa):
        raise ValueError(f"kappa must be a positive finite float, got {kappa}")
    G = as_gradient_matrix(G)
    n, d = G.shape
    f_grad = np.ascontiguousarray(f_grad, dtype=np.float64)
    if f_grad.shape != (d,):
        raise ValueError(f"f_grad must have shape ({d},), got {f_grad.shape}")
    if not f_grad.any():
        return UncertaintyEstimate(sigma_f=0.0, f_grad=f_grad)
    x, _, _, _ = shrunk_solve(G, f_grad)
    quad = float(f_grad @ x)
    if quad < 0.0:
        quad = 0.0
    return UncertaintyEstimate(sigma_f=math.sqrt(quad / (kappa * n)), f_grad=f_grad)
