"""Ground-truth machinery: the exact Gaussian posterior of quadratic losses
and a random-walk Metropolis sampler for everything else.

The Gaussian oracle provides exact samples and exact credibility values, which
anchor all theory tests; the Metropolis chain is the reference comparator for
the gradient-based uncertainty estimates.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .numstats import chi2_cdf

log = logging.getLogger(__name__)

__all__ = ["PosteriorOracle", "McmcChain", "mcmc_run", "tune_step_scale"]


class PosteriorOracle:
    """Exact Gaussian posterior N(theta_star, H^{-1}) of a quadratic loss."""

    def __init__(self, theta_star: np.ndarray, hessian: np.ndarray):
        theta_star = np.ascontiguousarray(theta_star, dtype=np.float64)
        hessian = np.ascontiguousarray(hessian, dtype=np.float64)
        d = theta_star.shape[0]
        if hessian.shape != (d, d):
            raise ValueError(f"hessian must have shape ({d}, {d})")
        if not np.allclose(hessian, hessian.T, rtol=0, atol=1e-10):
            raise ValueError("hessian must be symmetric")
        try:
            chol_h = np.linalg.cholesky(hessian)
        except np.linalg.LinAlgError as exc:
            raise ValueError("hessian must be positive definite") from exc
        self.theta_star = theta_star
        self.hessian = hessian
        self.dim = d
        inv = np.linalg.inv(hessian)
        inv = 0.5 * (inv + inv.T)
        self.chol = np.linalg.cholesky(inv)
        self._chol_h = chol_h

    @classmethod
    def from_model(cls, model) -> "PosteriorOracle":
        """Oracle for a quadratic model exposing theta_star and hessian."""
        return cls(model.theta_star, model.hessian)

    def sample(self, seed, size: int | None = None) -> np.ndarray:
        """Exact posterior draw(s): theta_star + chol @ x, x standard normal.

        ``seed`` may be an int or a numpy Generator. Returns shape (d,) when
        ``size`` is None, else (size, d).
        """
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        if size is None:
            return self.theta_star + self.chol @ rng.standard_normal(self.dim)
        x = rng.standard_normal((size, self.dim))
        return self.theta_star + x @ self.chol.T

    def credibility(self, theta: np.ndarray) -> float:
        """Exact credibility value 1 - F_chi2_d(q) with the quadratic form
        q = (theta - theta_star)' H (theta - theta_star)."""
        diff = np.asarray(theta, dtype=np.float64) - self.theta_star
        q = float(diff @ self.hessian @ diff)
        if q < 0.0:
            q = 0.0
        return 1.0 - chi2_cdf(q, self.dim)

    def marginal_std(self) -> np.ndarray:
        """Exact per-coordinate posterior standard deviations sqrt(H^{-1}_jj)."""
        return np.sqrt(np.sum(self.chol**2, axis=1))


@dataclass
class McmcChain:
    """Thinned post-burn-in samples from a random-walk Metropolis run."""

    samples: np.ndarray
    acceptance_rate: float
    step_scale: float
    tuning_warning: str | None = None

    def marginal_std(self) -> np.ndarray:
        return self.samples.std(axis=0)


def mcmc_run(
    model,
    n_samples: int,
    burn_in: int = 10_000,
    step_scale: float = 0.1,
    seed: int = 0,
    thin: int = 10,
    initial: np.ndarray | None = None,
    warn_on_poor_tuning: bool = True,
) -> McmcChain:
    """Random-walk Metropolis on the unnormalized log-posterior -L(theta).

    Proposals are isotropic Gaussian with scale ``step_scale``. ``n_samples``
    post-burn-in samples are kept, one every ``thin`` steps; the acceptance
    rate is recorded after burn-in only. An acceptance rate outside [0.1, 0.6]
    sets a tuning warning on the returned chain.
    """
    if n_samples < 1 or burn_in < 0 or thin < 1:
        raise ValueError("n_samples >= 1, burn_in >= 0 and thin >= 1 required")
    if step_scale <= 0:
        raise ValueError(f"step_scale must be positive, got {step_scale}")
    rng = np.random.default_rng(seed)
    theta = (
        np.zeros(model.dim) if initial is None else np.array(initial, dtype=np.float64)
    )
    log_p = -model.total_loss(theta)
    samples = np.empty((n_samples, model.dim))
    kept = 0
    accepted_post = 0
    steps_post = 0
    total_steps = burn_in + n_samples * thin
    for step in range(total_steps):
        proposal = theta + step_scale * rng.standard_normal(model.dim)
        log_p_prop = -model.total_loss(proposal)
        accept = math.log(rng.uniform()) < log_p_prop - log_p
        if accept:
            theta = proposal
            log_p = log_p_prop
        if step >= burn_in:
            steps_post += 1
            accepted_post += accept
            if steps_post % thin == 0:
                samples[kept] = theta
                kept += 1
    acceptance = accepted_post / steps_post
    warning = None
    if not 0.1 <= acceptance <= 0.6:
        warning = (
            f"acceptance rate {acceptance:.3f} outside [0.1, 0.6]; "
            f"step_scale={step_scale:g} likely needs retuning"
        )
        if warn_on_poor_tuning:
            log.warning("%s", warning)
    return McmcChain(
        samples=samples,
        acceptance_rate=acceptance,
        step_scale=step_scale,
        tuning_warning=warning,
    )


def tune_step_scale(
    model,
    seed: int = 0,
    target: float = 0.3,
    initial: np.ndarray | None = None,
    rounds: int = 8,
    probe_steps: int = 200,
) -> float:
    """Pick a proposal scale by short probe chains targeting ~30% acceptance."""
    scale = 2.38 / math.sqrt(model.dim)
    for round_idx in range(rounds):
        chain = mcmc_run(
            model,
            n_samples=probe_steps,
            burn_in=0,
            step_scale=scale,
            seed=seed + round_idx,
            thin=1,
            initial=initial,
            warn_on_poor_tuning=False,
        )
        if abs(chain.acceptance_rate - target) < 0.05:
            break
        scale *= math.exp(2.0 * (chain.acceptance_rate - target))
    return scale
