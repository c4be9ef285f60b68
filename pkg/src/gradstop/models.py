"""Differentiable loss models exposing per-sample losses and gradients.

Every model writes its total loss as a sum of n per-sample terms l_i(theta)
(data-point negative log-likelihood plus a 1/n share of the prior), and exposes
the (n, d) matrix of per-sample gradients consumed by the stopping criteria.

Two models: a synthetic quadratic model whose posterior is exactly Gaussian
(the ground-truth workhorse for every theory test) and L2-regularized logistic
regression.
"""

from __future__ import annotations

import abc
import math

import numpy as np
from scipy.special import expit

__all__ = ["LossModel", "QuadraticModel", "LogisticModel", "quadratic_make"]


class LossModel(abc.ABC):
    """A loss of the form L(theta) = sum_i l_i(theta) with per-sample gradients."""

    dim: int
    n_samples: int

    @abc.abstractmethod
    def sample_loss(self, i: int, theta: np.ndarray) -> float:
        """l_i(theta) for sample index i."""

    @abc.abstractmethod
    def sample_gradients(self, theta: np.ndarray) -> np.ndarray:
        """(n, d) matrix with row i equal to the gradient of l_i at theta."""

    def total_loss(self, theta: np.ndarray) -> float:
        return float(sum(self.sample_loss(i, theta) for i in range(self.n_samples)))

    def total_gradient(self, theta: np.ndarray) -> np.ndarray:
        return self.sample_gradients(theta).sum(axis=0)

    def _check_theta(self, theta) -> np.ndarray:
        theta = np.ascontiguousarray(theta, dtype=np.float64)
        if theta.shape != (self.dim,):
            raise ValueError(f"theta must have shape ({self.dim},), got {theta.shape}")
        if not np.isfinite(theta).all():
            raise ValueError("theta contains non-finite entries")
        return theta

    def _check_index(self, i: int) -> int:
        if not 0 <= i < self.n_samples:
            raise IndexError(f"sample index {i} out of range [0, {self.n_samples})")
        return int(i)


class QuadraticModel(LossModel):
    """Per-sample quadratic losses sharing one curvature matrix.

    l_i(theta) = (theta - c_i)' A (theta - c_i) / (2n) + const_i, with A
    symmetric positive definite and per-sample centers c_i. The total loss has
    Hessian H = A independent of theta and of the sample, its minimizer is the
    mean of the centers, the exact posterior is N(theta_star, H^{-1}), and the
    gradient covariance does not depend on theta. The constants are chosen so
    the total loss vanishes at the minimizer.
    """

    def __init__(self, hessian: np.ndarray, centers: np.ndarray):
        hessian = np.ascontiguousarray(hessian, dtype=np.float64)
        centers = np.ascontiguousarray(centers, dtype=np.float64)
        if hessian.ndim != 2 or hessian.shape[0] != hessian.shape[1]:
            raise ValueError("hessian must be a square matrix")
        d = hessian.shape[0]
        if centers.ndim != 2 or centers.shape[1] != d:
            raise ValueError(f"centers must have shape (n, {d})")
        if not np.allclose(hessian, hessian.T, rtol=0, atol=1e-10):
            raise ValueError("hessian must be symmetric")
        # positive definiteness check; also caches the factor for the oracle
        try:
            self._hessian_chol = np.linalg.cholesky(hessian)
        except np.linalg.LinAlgError as exc:
            raise ValueError("hessian must be positive definite") from exc
        self.hessian = hessian
        self.centers = centers
        self.dim = d
        self.n_samples = centers.shape[0]
        self.theta_star = centers.mean(axis=0)
        # per-sample Hessian contribution is A/n; constants zero the loss at
        # the minimizer
        diffs = self.theta_star - centers
        self._consts = -0.5 / self.n_samples * np.einsum(
            "ij,ij->i", diffs @ hessian, diffs
        )

    @property
    def per_sample_hessian(self) -> np.ndarray:
        """Each sample contributes this matrix to the total Hessian."""
        return self.hessian / self.n_samples

    def sample_loss(self, i: int, theta: np.ndarray) -> float:
        i = self._check_index(i)
        theta = self._check_theta(theta)
        diff = theta - self.centers[i]
        return float(
            0.5 / self.n_samples * diff @ self.hessian @ diff + self._consts[i]
        )

    def sample_gradients(self, theta: np.ndarray) -> np.ndarray:
        theta = self._check_theta(theta)
        return (theta - self.centers) @ self.hessian / self.n_samples

    def total_loss(self, theta: np.ndarray) -> float:
        theta = self._check_theta(theta)
        diffs = theta - self.centers
        quad = np.einsum("ij,ij->", diffs @ self.hessian, diffs)
        return float(0.5 / self.n_samples * quad + self._consts.sum())


def quadratic_make(
    d: int, n: int, spectrum, seed: int, center_scale: float | None = None
) -> QuadraticModel:
    """Build a random quadratic model with the given Hessian eigen-spectrum.

    The curvature matrix A is a seeded random rotation of diag(spectrum). The
    per-sample centers are Gaussian with covariance n * A^{-1} (the spread that
    makes n times the gradient covariance converge to the Hessian), so the
    model behaves like data genuinely drawn from its own likelihood.
    """
    if d < 1 or n < 1:
        raise ValueError(f"d and n must be >= 1, got d={d}, n={n}")
    spectrum = np.asarray(spectrum, dtype=np.float64)
    if spectrum.shape != (d,):
        raise ValueError(f"spectrum must have shape ({d},), got {spectrum.shape}")
    if not (spectrum > 0).all():
        raise ValueError("spectrum must be strictly positive")
    rng = np.random.default_rng(seed)
    if d == 1:
        rot = np.ones((1, 1))
    else:
        rot, upper = np.linalg.qr(rng.standard_normal((d, d)))
        rot = rot * np.sign(np.diag(upper))
    hessian = (rot * spectrum) @ rot.T
    hessian = 0.5 * (hessian + hessian.T)
    inv_sqrt = (rot / np.sqrt(spectrum)) @ rot.T
    scale = math.sqrt(n) if center_scale is None else float(center_scale)
    centers = scale * rng.standard_normal((n, d)) @ inv_sqrt.T
    return QuadraticModel(hessian, centers)


class LogisticModel(LossModel):
    """L2-regularized logistic regression on standardized features.

    A constant-1 bias column is appended internally, so the parameter dimension
    is one more than the feature count. With labels y_i in {-1, +1} and
    x_i the bias-augmented feature row,

        l_i(theta) = log(1 + exp(-y_i x_i' theta)) + lambda/(2n) ||theta||^2,

    i.e. each sample carries a 1/n share of the Gaussian prior. The total loss
    is convex in theta.
    """

    def __init__(self, features: np.ndarray, labels: np.ndarray, prior_precision: float = 1e-2):
        features = np.ascontiguousarray(features, dtype=np.float64)
        labels = np.asarray(labels)
        if features.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        n = features.shape[0]
        if labels.shape != (n,):
            raise ValueError(f"labels must have shape ({n},), got {labels.shape}")
        if not np.isin(labels, (0, 1)).all():
            raise ValueError("labels must be binary 0/1")
        if prior_precision < 0:
            raise ValueError("prior_precision must be non-negative")
        self.features = features
        self.labels = labels.astype(np.int64)
        self.prior_precision = float(prior_precision)
        self.n_samples = n
        self.dim = features.shape[1] + 1
        self._x = np.hstack([features, np.ones((n, 1))])
        self._y = 2.0 * self.labels - 1.0

    def _margins(self, theta: np.ndarray) -> np.ndarray:
        return self._y * (self._x @ theta)

    def sample_loss(self, i: int, theta: np.ndarray) -> float:
        i = self._check_index(i)
        theta = self._check_theta(theta)
        margin = self._y[i] * float(self._x[i] @ theta)
        prior = 0.5 * self.prior_precision / self.n_samples * float(theta @ theta)
        return float(np.logaddexp(0.0, -margin)) + prior

    def sample_gradients(self, theta: np.ndarray) -> np.ndarray:
        theta = self._check_theta(theta)
        weights = -self._y * expit(-self._margins(theta))
        grads = weights[:, None] * self._x
        if self.prior_precision:
            grads += self.prior_precision / self.n_samples * theta
        return grads

    def total_loss(self, theta: np.ndarray) -> float:
        theta = self._check_theta(theta)
        nll = float(np.logaddexp(0.0, -self._margins(theta)).sum())
        return nll + 0.5 * self.prior_precision * float(theta @ theta)

    def predict_proba(self, features: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """P(label = 1) for rows of ``features`` (without the bias column)."""
        features = np.asarray(features, dtype=np.float64)
        return expit(features @ theta[:-1] + theta[-1])

    def mean_nll(self, features: np.ndarray, labels: np.ndarray, theta: np.ndarray) -> float:
        """Mean logistic negative log-likelihood on held-out rows (no prior term)."""
        y = 2.0 * np.asarray(labels, dtype=np.float64) - 1.0
        features = np.asarray(features, dtype=np.float64)
        margins = y * (features @ theta[:-1] + theta[-1])
        return float(np.logaddexp(0.0, -margins).mean())

    def accuracy(self, features: np.ndarray, labels: np.ndarray, theta: np.ndarray) -> float:
        pred = self.predict_proba(features, theta) >= 0.5
        return float(np.mean(pred == np.asarray(labels).astype(bool)))
