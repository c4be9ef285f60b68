"""Pure NumPy/Python implementations of the hot numerical kernels.

This module mirrors the compiled extension ``_speed`` function-for-function and
is used both as the import-time fallback and as the reference side of the
backend parity tests. Keep the two implementations algorithmically identical.
"""

from __future__ import annotations

import math

import numpy as np

NAME = "python"

# Convergence controls for the incomplete-gamma evaluation. The series/continued
# fraction needs O(sqrt(a)) extra iterations near x ~ a, so the cap is generous
# enough for degrees of freedom in the tens of thousands.
_GAMMA_TOL = 1e-16
_GAMMA_MAX_ITER = 10_000_000
_FPMIN = 1e-300


def _gamma_p_series(a: float, x: float) -> float:
    """Lower regularized incomplete gamma P(a, x) by power series (x < a + 1)."""
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(_GAMMA_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _GAMMA_TOL:
            return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise RuntimeError("incomplete gamma series did not converge")


def _gamma_q_contfrac(a: float, x: float) -> float:
    """Upper regularized incomplete gamma Q(a, x) by modified Lentz continued
    fraction (x >= a + 1)."""
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_TOL:
            return h * math.exp(-x + a * math.log(x) - math.lgamma(a))
    raise RuntimeError("incomplete gamma continued fraction did not converge")


def chi2_cdf(x: float, d: int) -> float:
    """Chi-squared CDF with d degrees of freedom, i.e. P(d/2, x/2).

    Inputs are assumed validated (x >= 0 finite, d >= 1).
    """
    if x == 0.0:
        return 0.0
    a = 0.5 * d
    xs = 0.5 * x
    if xs < a + 1.0:
        return min(_gamma_p_series(a, xs), 1.0)
    return max(1.0 - _gamma_q_contfrac(a, xs), 0.0)


def gram_traces(gc: np.ndarray) -> tuple[float, float]:
    """Return (tr(S), tr(S^2)) for S = gc.T @ gc via the smaller Gram matrix."""
    n, d = gc.shape
    s = gc.T @ gc if d <= n else gc @ gc.T
    tr = float(np.trace(s))
    tr2 = float(np.sum(s * s))
    return tr, tr2


def oas_epsilon_from_traces(tr: float, tr2: float, n: int, d: int) -> float:
    """Shrinkage intensity of the oracle-approximating shrinkage estimator
    (Chen, Wiesel, Eldar & Hero, 2010), clamped to [0, 1].

    A non-positive denominator means the covariance is already proportional to
    the identity (or is zero), in which case full shrinkage is returned.
    """
    num = (1.0 - 2.0 / d) * tr2 + tr * tr
    den = (n + 1.0 - 2.0 / d) * (tr2 - tr * tr / d)
    if den <= 0.0:
        return 1.0
    eps = num / den
    if eps >= 1.0:
        return 1.0
    if eps <= 0.0:
        return 0.0
    return eps


def oas_epsilon(gc: np.ndarray) -> float:
    n, d = gc.shape
    tr, tr2 = gram_traces(gc)
    return oas_epsilon_from_traces(tr, tr2, n, d)


def shrunk_solve(
    gc: np.ndarray, v: np.ndarray, eps: float, trace: float, woodbury: bool
) -> tuple[np.ndarray, int]:
    """Solve S_hat @ x = v for the shrunk covariance
    S_hat = (1 - eps) * gc.T @ gc + eps * trace / d * I.

    Returns (x, status); status 1 means the Cholesky factorization failed and x
    is invalid (the caller is expected to fall back to a pivoted solve).
    """
    n, d = gc.shape
    if woodbury:
        c = eps * trace / d
        if c <= 0.0:
            raise ValueError(
                "Woodbury path requires a positive shrinkage diagonal "
                f"(eps={eps}, trace={trace})"
            )
        m = (1.0 - eps) * (gc @ gc.T)
        m[np.diag_indices(n)] += c
        rhs = gc @ v
        try:
            low = np.linalg.cholesky(m)
        except np.linalg.LinAlgError:
            return v.copy(), 1
        w = _cho_solve(low, rhs)
        return (v - (1.0 - eps) * (gc.T @ w)) / c, 0
    sigma = (1.0 - eps) * (gc.T @ gc)
    sigma[np.diag_indices(d)] += eps * trace / d
    try:
        low = np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        return v.copy(), 1
    return _cho_solve(low, v), 0


def _cho_solve(low: np.ndarray, b: np.ndarray) -> np.ndarray:
    from scipy.linalg import solve_triangular

    y = solve_triangular(low, b, lower=True)
    return solve_triangular(low.T, y, lower=False)


def pivoted_solve(
    gc: np.ndarray, v: np.ndarray, eps: float, trace: float, woodbury: bool
) -> np.ndarray:
    """Fallback solve via LU with partial pivoting, for the rare case where
    roundoff makes the shrunk covariance numerically indefinite."""
    n, d = gc.shape
    if woodbury:
        c = eps * trace / d
        m = (1.0 - eps) * (gc @ gc.T)
        m[np.diag_indices(n)] += c
        w = np.linalg.solve(m, gc @ v)
        return (v - (1.0 - eps) * (gc.T @ w)) / c
    sigma = (1.0 - eps) * (gc.T @ gc)
    sigma[np.diag_indices(d)] += eps * trace / d
    return np.linalg.solve(sigma, v)


def pairwise_sign_cos(g: np.ndarray) -> tuple[float, float]:
    """Mean of sign(g_i . g_j) and of cos(g_i, g_j) over unordered row pairs.

    Pairs with a zero inner product contribute 0 to the sign mean; pairs where
    either row has zero norm contribute 0 to the cosine mean.
    """
    n = g.shape[0]
    gram = g @ g.T
    iu, ju = np.triu_indices(n, k=1)
    inner = gram[iu, ju]
    sign_mean = float(np.mean(np.sign(inner)))
    norms = np.sqrt(np.diag(gram))
    denom = norms[iu] * norms[ju]
    cos = np.divide(inner, denom, out=np.zeros_like(inner), where=denom > 0.0)
    return sign_mean, float(np.mean(cos))
