"""Numerical statistics on per-sample gradient matrices.

Everything here operates on an (n, d) float64 matrix whose i-th row is the
gradient of the i-th per-sample loss term at the current parameter vector:
chi-squared CDF, gradient mean/centering, OAS shrinkage intensity, and the
quadratic-form statistic z = n * g_bar' Sigma_hat^{-1} g_bar with a direct
(d <= n) and a Woodbury (d > n) inversion path.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels

log = logging.getLogger(__name__)

__all__ = [
    "DegenerateCovariance",
    "InversionPath",
    "CovarianceEstimate",
    "QuadStat",
    "as_gradient_matrix",
    "chi2_cdf",
    "mean_and_centered",
    "oas_epsilon",
    "shrunk_covariance",
    "shrunk_solve",
    "quad_stat",
]


class DegenerateCovariance(Exception):
    """The gradient covariance is identically zero while the mean gradient is
    not, so the quadratic-form statistic is undefined. Callers must handle this
    rather than receive a silently extreme value."""


class InversionPath(Enum):
    DIRECT = "direct"
    WOODBURY = "woodbury"


@dataclass(frozen=True)
class CovarianceEstimate:
    """Shrunk gradient covariance (1-eps)*Sigma + eps*tr(Sigma)/d * I."""

    sigma_hat: np.ndarray
    epsilon: float
    trace_sigma: float


@dataclass(frozen=True)
class QuadStat:
    """The statistic z = n * g_bar' Sigma_hat^{-1} g_bar and its ingredients."""

    z: float
    g_bar: np.ndarray
    path: InversionPath
    epsilon: float
    trace_sigma: float


def as_gradient_matrix(G) -> np.ndarray:
    """Validate and return G as a C-contiguous float64 (n, d) array.

    Requires n >= 2 (a covariance needs at least two samples) and finite
    entries.
    """
    G = np.ascontiguousarray(G, dtype=np.float64)
    if G.ndim != 2:
        raise ValueError(f"gradient matrix must be 2-D, got shape {G.shape}")
    n, d = G.shape
    if n < 2:
        raise ValueError(f"gradient matrix needs at least 2 rows, got {n}")
    if d < 1:
        raise ValueError("gradient matrix needs at least 1 column")
    if not np.isfinite(G).all():
        raise ValueError("gradient matrix contains non-finite entries")
    return G


def chi2_cdf(x: float, d: int) -> float:
    """CDF of the chi-squared distribution with d degrees of freedom at x,
    i.e. the regularized lower incomplete gamma P(d/2, x/2).

    Evaluated by power series / continued fraction, accurate to ~1e-12
    absolute; no table interpolation, so large d (thousands) is fine.
    """
    if not float(d) == int(d) or d < 1:
        raise ValueError(f"degrees of freedom must be a positive integer, got {d}")
    x = float(x)
    if math.isnan(x) or x < 0.0:
        raise ValueError(f"chi2_cdf requires x >= 0, got {x}")
    if math.isinf(x):
        return 1.0
    return float(_kernels.chi2_cdf(x, int(d)))


def mean_and_centered(G) -> tuple[np.ndarray, np.ndarray]:
    """Return (g_bar, G_centered) with G_centered = (G - g_bar) / sqrt(n).

    The scaling makes G_centered.T @ G_centered equal the 1/n-normalized
    empirical covariance of the rows exactly.
    """
    G = as_gradient_matrix(G)
    n = G.shape[0]
    g_bar = G.mean(axis=0)
    centered = np.ascontiguousarray((G - g_bar) / math.sqrt(n))
    return g_bar, centered


def oas_epsilon(G_centered) -> float:
    """OAS shrinkage intensity for the covariance implied by a centered,
    1/sqrt(n)-scaled gradient matrix (Chen, Wiesel, Eldar & Hero, 2010).

    Degenerate inputs (zero covariance, covariance proportional to the
    identity, d = 1) return 1.
    """
    gc = np.ascontiguousarray(G_centered, dtype=np.float64)
    if gc.ndim != 2:
        raise ValueError("centered gradient matrix must be 2-D")
    return float(_kernels.oas_epsilon(gc))


def shrunk_covariance(G, *, epsilon: float | None = None) -> CovarianceEstimate:
    """Materialize the shrunk covariance matrix for diagnostics and tests.

    The solve paths in quad_stat never build this matrix; use those for
    anything performance-sensitive.
    """
    G = as_gradient_matrix(G)
    d = G.shape[1]
    _, gc = mean_and_centered(G)
    trace = float(np.einsum("ij,ij->", gc, gc))
    eps = _resolve_epsilon(gc, epsilon)
    sigma = (1.0 - eps) * (gc.T @ gc)
    sigma[np.diag_indices(d)] += eps * trace / d
    return CovarianceEstimate(sigma_hat=sigma, epsilon=eps, trace_sigma=trace)


def _resolve_epsilon(gc: np.ndarray, epsilon: float | None) -> float:
    if epsilon is None:
        return float(_kernels.oas_epsilon(gc))
    eps = float(epsilon)
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"epsilon must be in [0, 1], got {epsilon}")
    return eps


def _resolve_path(n: int, d: int, force_path: InversionPath | str | None) -> InversionPath:
    if force_path is None:
        return InversionPath.WOODBURY if d > n else InversionPath.DIRECT
    return InversionPath(force_path)


def _solve_with_fallback(
    gc: np.ndarray, v: np.ndarray, eps: float, trace: float, path: InversionPath
) -> np.ndarray:
    woodbury = path is InversionPath.WOODBURY
    x, status = _kernels.shrunk_solve(gc, v, eps, trace, woodbury)
    if status != 0:
        # Sigma_hat is SPD in exact arithmetic but roundoff near eps -> 0 can
        # defeat Cholesky; retry with an LU (partially pivoted) solve.
        n, d = gc.shape
        log.warning(
            "Cholesky factorization failed on the %s path (n=%d, d=%d, eps=%.3g); "
            "falling back to a pivoted solve",
            path.value,
            n,
            d,
            eps,
        )
        x = _kernels.pivoted_solve(gc, v, eps, trace, woodbury)
    return x


def shrunk_solve(
    G,
    v: np.ndarray,
    *,
    epsilon: float | None = None,
    force_path: InversionPath | str | None = None,
) -> tuple[np.ndarray, InversionPath, float, float]:
    """Solve Sigma_hat @ x = v for the shrunk gradient covariance of G.

    Returns (x, path, epsilon, trace_sigma). epsilon defaults to the OAS value
    recomputed from G; the inversion path defaults to direct for d <= n and
    Woodbury for d > n. Raises DegenerateCovariance when the covariance is
    zero (callers with a zero right-hand side should short-circuit instead).
    """
    G = as_gradient_matrix(G)
    n, d = G.shape
    v = np.ascontiguousarray(v, dtype=np.float64)
    if v.shape != (d,):
        raise ValueError(f"right-hand side must have shape ({d},), got {v.shape}")
    _, gc = mean_and_centered(G)
    trace = float(np.einsum("ij,ij->", gc, gc))
    path = _resolve_path(n, d, force_path)
    if trace == 0.0:
        raise DegenerateCovariance(
            "gradient covariance is zero; the shrunk-covariance solve is undefined"
        )
    eps = _resolve_epsilon(gc, epsilon)
    x = _solve_with_fallback(gc, v, eps, trace, path)
    return x, path, eps, trace


def quad_stat(
    G,
    *,
    epsilon: float | None = None,
    force_path: InversionPath | str | None = None,
) -> QuadStat:
    """The quadratic-form statistic z = n * g_bar' Sigma_hat^{-1} g_bar.

    z is 0 whenever the mean gradient is exactly zero, regardless of the
    covariance. A zero covariance with a nonzero mean gradient raises
    DegenerateCovariance. ``epsilon`` pins the shrinkage intensity (tests
    only); ``force_path`` overrides the d-vs-n path selection.
    """
    G = as_gradient_matrix(G)
    n, d = G.shape
    g_bar, gc = mean_and_centered(G)
    trace = float(np.einsum("ij,ij->", gc, gc))
    path = _resolve_path(n, d, force_path)
    if not g_bar.any():
        eps = _resolve_epsilon(gc, epsilon)
        return QuadStat(z=0.0, g_bar=g_bar, path=path, epsilon=eps, trace_sigma=trace)
    if trace == 0.0:
        raise DegenerateCovariance(
            "all per-sample gradients are identical but nonzero; "
            "the statistic is undefined"
        )
    eps = _resolve_epsilon(gc, epsilon)
    x = _solve_with_fallback(gc, g_bar, eps, trace, path)
    z = n * float(g_bar @ x)
    # quadratic form with an SPD matrix; clip roundoff-negative values
    if z < 0.0:
        z = 0.0
    return QuadStat(z=z, g_bar=g_bar, path=path, epsilon=eps, trace_sigma=trace)
