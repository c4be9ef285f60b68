"""Validation-set-free baseline stopping statistics.

All statistics are computed from the same per-sample gradient matrix the main
criterion consumes: evidence bound (EB), gradient signal-to-noise ratio (GSNR),
mean pairwise sign/cosine similarity, and gradient disparity (GD) between two
fixed half-batches. Stop rules: EB fires as soon as its statistic becomes
positive; GD on the fifth increase; GSNR/sign/cos on the fifth decrease
(cumulative counts, ties never count).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .criterion import Decision
from .numstats import as_gradient_matrix, mean_and_centered

__all__ = [
    "BaselineName",
    "BaselineStat",
    "BaselineStopRule",
    "VARIANCE_FLOOR",
    "stat_sign",
    "stat_cos",
    "stat_gsnr",
    "stat_eb",
    "stat_gd",
    "rule_step",
]

# Converged runs have near-zero per-coordinate gradient variances.
VARIANCE_FLOOR = 1e-12


class BaselineName(Enum):
    EB = "eb"
    GSNR = "gsnr"
    SIGN = "sign"
    COS = "cos"
    GD = "gd"


@dataclass(frozen=True)
class BaselineStat:
    name: BaselineName
    value: float
    iteration: int = 0


def stat_sign(G) -> float:
    """Mean over unordered row pairs of sign(g_i . g_j); zero inner products
    contribute 0."""
    G = as_gradient_matrix(G)
    sign_mean, _ = _kernels.pairwise_sign_cos(G)
    return float(sign_mean)


def stat_cos(G) -> float:
    """Mean over unordered row pairs of the cosine similarity; rows with zero
    norm contribute 0 to their pairs."""
    G = as_gradient_matrix(G)
    _, cos_mean = _kernels.pairwise_sign_cos(G)
    return float(cos_mean)


def _coordinate_variances(G: np.ndarray) -> np.ndarray:
    _, gc = mean_and_centered(G)
    return np.einsum("ij,ij->j", gc, gc)


def stat_gsnr(G) -> float:
    """Per-coordinate squared mean gradient over (floored) gradient variance,
    averaged over coordinates."""
    G = as_gradient_matrix(G)
    d = G.shape[1]
    g_bar = G.mean(axis=0)
    var = _coordinate_variances(G)
    return float(np.sum(g_bar**2 / (var + VARIANCE_FLOOR)) / d)


def stat_eb(G) -> float:
    """Evidence-bound statistic 1 - (n/d) * sum_k g_bar_k^2 / (var_k + floor);
    positive once the mean gradient is small against its sampling noise."""
    G = as_gradient_matrix(G)
    n, d = G.shape
    g_bar = G.mean(axis=0)
    var = _coordinate_variances(G)
    return float(1.0 - (n / d) * np.sum(g_bar**2 / (var + VARIANCE_FLOOR)))


def stat_gd(G_half1, G_half2) -> float:
    """Gradient disparity: L2 distance between the mean gradients of two
    disjoint half-batches (split fixed per run)."""
    h1 = np.ascontiguousarray(G_half1, dtype=np.float64)
    h2 = np.ascontiguousarray(G_half2, dtype=np.float64)
    if h1.ndim != 2 or h2.ndim != 2:
        raise ValueError("half-batches must be 2-D gradient matrices")
    if h1.shape[1] != h2.shape[1]:
        raise ValueError(
            f"half-batches disagree on dimension: {h1.shape[1]} vs {h2.shape[1]}"
        )
    if h1.shape[0] < 1 or h2.shape[0] < 1:
        raise ValueError("half-batches must be non-empty")
    return float(np.linalg.norm(h1.mean(axis=0) - h2.mean(axis=0)))


@dataclass
class BaselineStopRule:
    """Counting stop rule; fires when ``counter`` reaches ``patience`` (or on
    the sign condition for EB)."""

    name: BaselineName
    patience: int = 5
    counter: int = 0
    stopped: bool = False


def rule_step(rule: BaselineStopRule, prev: float | None, cur: float) -> Decision:
    """Advance a stop rule with the previous and current statistic values.

    GD counts increases; GSNR/sign/cos count decreases; equal values never
    count. EB ignores the history and stops as soon as the value is positive.
    ``prev`` is None on the first observation.
    """
    if rule.stopped:
        raise RuntimeError(f"rule {rule.name.value} already stopped")
    if rule.name is BaselineName.EB:
        if cur > 0.0:
            rule.stopped = True
            return Decision.STOP
        return Decision.CONTINUE
    if prev is not None:
        adverse = cur > prev if rule.name is BaselineName.GD else cur < prev
        if adverse:
            rule.counter += 1
            if rule.counter >= rule.patience:
                rule.stopped = True
                return Decision.STOP
    return Decision.CONTINUE
