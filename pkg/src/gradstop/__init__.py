"""gradstop: early stopping of gradient descent via approximate posterior
sampling from per-sample gradient statistics.

The stopping criterion needs only the matrix of per-sample loss gradients that
full-batch training already computes: it estimates the Bayesian credibility
value of the current iterate from the mean gradient and an OAS-shrunk gradient
covariance, and stops when that value matches a uniform draw (stochastic mode)
or crosses a threshold (deterministic mode).
"""

from ._kernels import BACKEND
from .baselines import (
    BaselineName,
    BaselineStat,
    BaselineStopRule,
    rule_step,
    stat_cos,
    stat_eb,
    stat_gd,
    stat_gsnr,
    stat_sign,
)
from .criterion import (
    CredibleValue,
    Decision,
    StopController,
    UncertaintyEstimate,
    credible_value,
    uncertainty_of,
)
from .models import LogisticModel, LossModel, QuadraticModel, quadratic_make
from .numstats import (
    CovarianceEstimate,
    DegenerateCovariance,
    InversionPath,
    QuadStat,
    chi2_cdf,
    mean_and_centered,
    oas_epsilon,
    quad_stat,
    shrunk_covariance,
)
from .optim import AdamHyper, OptimizerState, adam_step, gd_step, run
from .oracle import McmcChain, PosteriorOracle, mcmc_run, tune_step_scale
from .trace import CriterionTrace

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "AdamHyper",
    "BaselineName",
    "BaselineStat",
    "BaselineStopRule",
    "CovarianceEstimate",
    "CredibleValue",
    "CriterionTrace",
    "Decision",
    "DegenerateCovariance",
    "InversionPath",
    "LogisticModel",
    "LossModel",
    "McmcChain",
    "OptimizerState",
    "PosteriorOracle",
    "QuadStat",
    "QuadraticModel",
    "StopController",
    "UncertaintyEstimate",
    "adam_step",
    "chi2_cdf",
    "credible_value",
    "gd_step",
    "mcmc_run",
    "mean_and_centered",
    "oas_epsilon",
    "quad_stat",
    "quadratic_make",
    "rule_step",
    "run",
    "shrunk_covariance",
    "stat_cos",
    "stat_eb",
    "stat_gd",
    "stat_gsnr",
    "stat_sign",
    "tune_step_scale",
    "uncertainty_of",
]
