"""Frozen experiment presets and tiny synthetic dataset generators.

Real (e.g. medical) CSV datasets are referenced by path at run time and are
not shipped; the synthetic generators below produce desk-scale fixtures with
the same shape: an overfitting-prone wide classification problem and a small
well-regularized one for posterior-sampling comparisons.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import expit

from .data import Dataset
from .models import QuadraticModel, quadratic_make

__all__ = [
    "QUADRATIC_DIM",
    "QUADRATIC_SAMPLES",
    "SPECTRUM_RANGE",
    "quadratic_preset",
    "quadratic_theta0",
    "make_overfit_classification",
    "make_mcmc_fixture",
]

# Frozen defaults of the synthetic quadratic benchmark: 50 parameters, 200
# samples, Hessian spectrum log-uniform in [0.1, 10].
QUADRATIC_DIM = 50
QUADRATIC_SAMPLES = 200
SPECTRUM_RANGE = (0.1, 10.0)


def quadratic_preset(
    seed: int,
    dim: int = QUADRATIC_DIM,
    n_samples: int = QUADRATIC_SAMPLES,
    spectrum_range: tuple[float, float] = SPECTRUM_RANGE,
) -> QuadraticModel:
    """Random quadratic model with a seeded log-uniform Hessian spectrum."""
    lo, hi = spectrum_range
    if not 0 < lo <= hi:
        raise ValueError(f"invalid spectrum range {spectrum_range}")
    rng = np.random.default_rng(seed)
    spectrum = np.exp(rng.uniform(math.log(lo), math.log(hi), size=dim))
    return quadratic_make(dim, n_samples, spectrum, seed=seed + 1)


def quadratic_theta0(model: QuadraticModel, seed: int, scale: float = 3.0) -> np.ndarray:
    """Starting point far enough out that the descent path sweeps the whole
    credibility range."""
    rng = np.random.default_rng(seed + 2)
    return model.theta_star + scale * rng.standard_normal(model.dim)


def make_overfit_classification(
    seed: int,
    n_rows: int = 125,
    n_informative: int = 10,
    n_noise: int = 29,
    coef_scale: float = 2.5,
    flip_fraction: float = 0.05,
) -> Dataset:
    """Overfitting-prone binary classification: few informative features,
    many pure-noise columns, and flipped labels so late training fits noise.

    With the default 125 rows and a (0.64, 0.16, 0.20) split this yields 80
    training rows against 40 parameters (39 features + bias). The defaults are
    tuned so the held-out loss dips early and then climbs for the rest of a
    4000-step budget (Adam, learning rate 1e-3).
    """
    rng = np.random.default_rng(seed)
    p = n_informative + n_noise
    features = rng.standard_normal((n_rows, p))
    coef = coef_scale * rng.standard_normal(n_informative)
    probs = expit(features[:, :n_informative] @ coef)
    labels = (rng.uniform(size=n_rows) < probs).astype(np.int64)
    flip = rng.uniform(size=n_rows) < flip_fraction
    labels = np.where(flip, 1 - labels, labels)
    names = [f"inf{i:02d}" for i in range(n_informative)] + [
        f"noise{i:02d}" for i in range(n_noise)
    ]
    return Dataset(features=features, labels=labels, feature_names=names)


def make_mcmc_fixture(seed: int, n_rows: int = 100, n_features: int = 11) -> Dataset:
    """Small well-posed classification fixture for posterior-sampling
    comparisons (all features informative, no label noise)."""
    rng = np.random.default_rng(seed)
    features = rng.standard_normal((n_rows, n_features))
    coef = rng.standard_normal(n_features)
    probs = expit(features @ coef)
    labels = (rng.uniform(size=n_rows) < probs).astype(np.int64)
    names = [f"x{i:02d}" for i in range(n_features)]
    return Dataset(features=features, labels=labels, feature_names=names)
