# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: chi-squared CDF, OAS shrinkage, shrunk-covariance solves
and pairwise gradient-similarity statistics.

Algorithmically identical to the pure backend in ``_pure``; Gram matrices and
triangular solves go through BLAS/LAPACK (dsyrk/dpotrf/dpotrs) on the Fortran
view of the C-contiguous inputs. A C-contiguous (n, d) array reads as the
(d, n) transpose with lda=d in Fortran order, which is exactly the orientation
the kernels need.
"""

from libc.math cimport exp, fabs, lgamma, log, sqrt

import numpy as np

from scipy.linalg.cython_blas cimport dgemv, dsyrk
from scipy.linalg.cython_lapack cimport dpotrf, dpotrs

NAME = "compiled"

cdef double _GAMMA_TOL = 1e-16
cdef double _FPMIN = 1e-300
cdef long _GAMMA_MAX_ITER = 10_000_000


cdef double _gamma_p_series(double a, double x) except -1.0:
    cdef double ap = a
    cdef double term = 1.0 / a
    cdef double total = term
    cdef long i
    for i in range(_GAMMA_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if fabs(term) < fabs(total) * _GAMMA_TOL:
            return total * exp(-x + a * log(x) - lgamma(a))
    raise RuntimeError("incomplete gamma series did not converge")


cdef double _gamma_q_contfrac(double a, double x) except -1.0:
    cdef double b = x + 1.0 - a
    cdef double c = 1.0 / _FPMIN
    cdef double d = 1.0 / b
    cdef double h = d
    cdef double an, delta
    cdef long i
    for i in range(1, _GAMMA_MAX_ITER):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if fabs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if fabs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < _GAMMA_TOL:
            return h * exp(-x + a * log(x) - lgamma(a))
    raise RuntimeError("incomplete gamma continued fraction did not converge")


def chi2_cdf(double x, long d):
    """Chi-squared CDF with d degrees of freedom; inputs assumed validated."""
    if x == 0.0:
        return 0.0
    cdef double a = 0.5 * d
    cdef double xs = 0.5 * x
    cdef double p
    if xs < a + 1.0:
        p = _gamma_p_series(a, xs)
        return p if p < 1.0 else 1.0
    p = 1.0 - _gamma_q_contfrac(a, xs)
    return p if p > 0.0 else 0.0


cdef void _gram(double[:, ::1] gc, double[:, ::1] out, bint rows) noexcept:
    # rows=False: out (d x d) = gc.T @ gc ; rows=True: out (n x n) = gc @ gc.T.
    # Fortran-lower triangle is written, i.e. out[j, i] holds element (i, j),
    # i >= j, of the symmetric result.
    cdef int n = gc.shape[0]
    cdef int d = gc.shape[1]
    cdef char uplo = b'L'
    cdef char trans
    cdef int m, k, lda
    cdef double one = 1.0
    cdef double zero = 0.0
    if rows:
        trans = b'T'
        m = n
        k = d
    else:
        trans = b'N'
        m = d
        k = n
    lda = d
    dsyrk(&uplo, &trans, &m, &k, &one, &gc[0, 0], &lda, &zero, &out[0, 0], &m)


def gram_traces(double[:, ::1] gc):
    """Return (tr(S), tr(S^2)) for S = gc.T @ gc via the smaller Gram matrix."""
    cdef int n = gc.shape[0]
    cdef int d = gc.shape[1]
    cdef int m = d if d <= n else n
    out_arr = np.zeros((m, m), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    _gram(gc, out, d > n)
    cdef double tr = 0.0
    cdef double tr2 = 0.0
    cdef int i, j
    for j in range(m):
        tr += out[j, j]
        tr2 += out[j, j] * out[j, j]
        for i in range(j + 1, m):
            tr2 += 2.0 * out[j, i] * out[j, i]
    return tr, tr2


def oas_epsilon_from_traces(double tr, double tr2, long n, long d):
    """Shrinkage intensity of the oracle-approximating shrinkage estimator
    (Chen, Wiesel, Eldar & Hero, 2010), clamped to [0, 1]."""
    cdef double num = (1.0 - 2.0 / d) * tr2 + tr * tr
    cdef double den = (n + 1.0 - 2.0 / d) * (tr2 - tr * tr / d)
    if den <= 0.0:
        return 1.0
    cdef double eps = num / den
    if eps >= 1.0:
        return 1.0
    if eps <= 0.0:
        return 0.0
    return eps


def oas_epsilon(double[:, ::1] gc):
    tr, tr2 = gram_traces(gc)
    return oas_epsilon_from_traces(tr, tr2, gc.shape[0], gc.shape[1])


cdef int _spd_solve_inplace(double[:, ::1] a, double[::1] b) noexcept:
    # Solve a @ x = b with a symmetric positive definite (Fortran-lower filled);
    # b is overwritten with x. Returns LAPACK info (0 on success).
    cdef char uplo = b'L'
    cdef int m = a.shape[0]
    cdef int nrhs = 1
    cdef int info = 0
    dpotrf(&uplo, &m, &a[0, 0], &m, &info)
    if info != 0:
        return info
    dpotrs(&uplo, &m, &nrhs, &a[0, 0], &m, &b[0], &m, &info)
    return info


def shrunk_solve(double[:, ::1] gc, double[::1] v, double eps, double trace,
                 bint woodbury):
    """Solve S_hat @ x = v for S_hat = (1-eps) gc.T gc + eps*trace/d * I.

    Returns (x, status); status 1 means the Cholesky factorization failed and
    the caller should fall back to a pivoted solve.
    """
    cdef int n = gc.shape[0]
    cdef int d = gc.shape[1]
    cdef double c, scale
    cdef int i, j, inc = 1
    cdef char trans
    cdef double one = 1.0
    cdef double zero = 0.0
    cdef double[:, ::1] mat
    cdef double[::1] rhs, x
    if woodbury:
        c = eps * trace / d
        if c <= 0.0:
            raise ValueError(
                "Woodbury path requires a positive shrinkage diagonal "
                f"(eps={eps}, trace={trace})"
            )
        mat_arr = np.zeros((n, n), dtype=np.float64)
        mat = mat_arr
        _gram(gc, mat, True)
        scale = 1.0 - eps
        for j in range(n):
            for i in range(j, n):
                mat[j, i] *= scale
            mat[j, j] += c
        rhs_arr = np.empty(n, dtype=np.float64)
        rhs = rhs_arr
        trans = b'T'
        dgemv(&trans, &d, &n, &one, &gc[0, 0], &d, &v[0], &inc, &zero,
              &rhs[0], &inc)
        if _spd_solve_inplace(mat, rhs) != 0:
            return np.asarray(v).copy(), 1
        x_arr = np.empty(d, dtype=np.float64)
        x = x_arr
        trans = b'N'
        dgemv(&trans, &d, &n, &one, &gc[0, 0], &d, &rhs[0], &inc, &zero,
              &x[0], &inc)
        for i in range(d):
            x[i] = (v[i] - scale * x[i]) / c
        return x_arr, 0
    mat_arr = np.zeros((d, d), dtype=np.float64)
    mat = mat_arr
    _gram(gc, mat, False)
    scale = 1.0 - eps
    c = eps * trace / d
    for j in range(d):
        for i in range(j, d):
            mat[j, i] *= scale
        mat[j, j] += c
    x_arr = np.asarray(v).copy()
    x = x_arr
    if _spd_solve_inplace(mat, x) != 0:
        return np.asarray(v).copy(), 1
    return x_arr, 0


def pairwise_sign_cos(double[:, ::1] g):
    """Mean of sign(g_i . g_j) and of cos(g_i, g_j) over unordered row pairs."""
    cdef int n = g.shape[0]
    gram_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] gram = gram_arr
    _gram(g, gram, True)
    cdef double sign_sum = 0.0
    cdef double cos_sum = 0.0
    cdef double inner, denom
    cdef long pairs = (<long> n) * (n - 1) // 2
    cdef int i, j
    for j in range(n):
        for i in range(j + 1, n):
            inner = gram[j, i]
            if inner > 0.0:
                sign_sum += 1.0
            elif inner < 0.0:
                sign_sum -= 1.0
            denom = sqrt(gram[j, j]) * sqrt(gram[i, i])
            if denom > 0.0:
                cos_sum += inner / denom
    return sign_sum / pairs, cos_sum / pairs
