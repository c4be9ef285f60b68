"""Experiment execution: wiring configs to models, observers and output files.

Every public entry point takes a validated RunConfig, runs one training loop
per seed with all enabled stopping criteria observing simultaneously, and
writes trace/summary CSVs plus the serialized config for provenance.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig
from .criterion import StopController, uncertainty_of
from .data import Dataset, load_csv, split_standardize
from .models import LogisticModel, LossModel
from .observers import BaselineObserver, CredibilityObserver, LossObserver
from .optim import run
from .oracle import PosteriorOracle, mcmc_run, tune_step_scale
from .presets import (
    make_mcmc_fixture,
    make_overfit_classification,
    quadratic_preset,
    quadratic_theta0,
)
from .trace import (
    CriterionTrace,
    aggregate_summary,
    write_aggregate_csv,
    write_summary_csv,
    write_trace_csv,
)

log = logging.getLogger(__name__)

__all__ = ["ExperimentSetup", "build_setup", "run_single", "cmd_run", "cmd_sweep", "cmd_uncertainty"]

BASELINE_NAMES = ("eb", "gsnr", "sign", "cos", "gd")


@dataclass
class ExperimentSetup:
    """Everything one seeded run needs: the model, the start point, held-out
    data, and (for synthetic quadratic runs) the exact posterior."""

    model: LossModel
    theta0: np.ndarray
    test: tuple[np.ndarray, np.ndarray] | None = None
    validation: tuple[np.ndarray, np.ndarray] | None = None
    posterior: PosteriorOracle | None = None
    feature_names: list[str] | None = None


def _logistic_dataset(config: RunConfig, seed: int) -> Dataset:
    if config.dataset_path is not None:
        return load_csv(config.dataset_path, config.label_column, config.positive_label)
    if config.synthetic == "overfit":
        return make_overfit_classification(seed)
    return make_mcmc_fixture(seed)


def build_setup(config: RunConfig, seed: int) -> ExperimentSetup:
    if config.model == "quadratic":
        model = quadratic_preset(
            seed,
            dim=config.quadratic_dim,
            n_samples=config.quadratic_samples,
            spectrum_range=(config.spectrum_min, config.spectrum_max),
        )
        return ExperimentSetup(
            model=model,
            theta0=quadratic_theta0(model, seed),
            posterior=PosteriorOracle.from_model(model),
        )
    ds = _logistic_dataset(config, seed)
    split, std = split_standardize(ds, fractions=config.fractions, seed=seed)
    model = LogisticModel(
        std.features[split.train_idx],
        std.labels[split.train_idx],
        prior_precision=config.prior_precision,
    )
    test = (std.features[split.test_idx], std.labels[split.test_idx])
    validation = None
    if len(split.val_idx):
        validation = (std.features[split.val_idx], std.labels[split.val_idx])
    return ExperimentSetup(
        model=model,
        theta0=np.zeros(model.dim),
        test=test,
        validation=validation,
        feature_names=list(std.feature_names) + ["bias"],
    )


def _controller(config: RunConfig, seed: int) -> StopController:
    if config.gradstop_mode == "stochastic":
        return StopController.stochastic(seed)
    return StopController.deterministic_threshold(config.gradstop_u)


def run_single(config: RunConfig, seed: int) -> tuple[CriterionTrace, ExperimentSetup]:
    """One fully-observed training run for one seed."""
    setup = build_setup(config, seed)
    observers = [
        CredibilityObserver(
            controller=_controller(config, seed),
            kappa=config.kappa,
            posterior=setup.posterior,
        ),
        LossObserver(
            setup.model,
            test=setup.test,
            validation=setup.validation,
            rule=config.validation_rule,
            patience=config.baseline_patience,
        ),
    ]
    observers += [
        BaselineObserver(name, patience=config.baseline_patience, split_seed=seed)
        for name in BASELINE_NAMES
    ]
    trace = run(
        setup.model,
        setup.theta0,
        budget=config.resolved_budget,
        observers=observers,
        optimizer=config.resolved_optimizer,
        learning_rate=config.resolved_learning_rate,
    )
    trace.outcomes["end_of_training"] = config.resolved_budget
    return trace, setup


def _summary_rows(trace: CriterionTrace, seed: int) -> list[dict]:
    rows = []
    for criterion in sorted(trace.outcomes):
        iteration = trace.outcomes[criterion]
        rows.append(
            {
                "criterion": criterion,
                "seed": seed,
                "iteration": iteration,
                "test_loss": trace.value_at("test_loss", iteration),
                "test_accuracy": trace.value_at("test_acc", iteration),
                "train_loss": trace.value_at("train_loss", iteration),
            }
        )
    return rows


def _prepare_out_dir(config: RunConfig, out_dir: Path) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    config.write(out_dir / "config.json")


def cmd_run(config: RunConfig) -> Path:
    """Train with all criteria observed; write per-seed traces plus summary
    and aggregate CSVs. Returns the output directory."""
    out_dir = Path(config.out_dir)
    _prepare_out_dir(config, out_dir)
    summary: list[dict] = []
    for seed in config.seeds():
        trace, _ = run_single(config, seed)
        seed_dir = out_dir / f"seed-{seed}"
        seed_dir.mkdir(parents=True, exist_ok=True)
        write_trace_csv(trace, seed_dir / "trace.csv")
        summary.extend(_summary_rows(trace, seed))
    write_summary_csv(summary, out_dir / "summary.csv")
    write_aggregate_csv(aggregate_summary(summary), out_dir / "aggregate.csv")
    return out_dir


def first_crossing(trace: CriterionTrace, u: float) -> int:
    """First iteration whose credibility estimate reaches u; the budget end
    when the threshold is never reached."""
    s_hat = trace.column("s_hat")
    hits = np.flatnonzero(s_hat >= u)
    return int(hits[0] + 1) if hits.size else len(trace)


def cmd_sweep(config: RunConfig, u_values: list[float]) -> Path:
    """Deterministic-threshold sweep over u, sharing one trace per seed.

    The credibility statistic does not depend on u, so each seed is trained
    once and every threshold's stop iteration is read off the trace.
    """
    if not u_values:
        raise ValueError("u sweep needs at least one threshold value")
    if any(not 0.0 <= u <= 1.0 for u in u_values):
        raise ValueError(f"u values must lie in [0, 1], got {u_values}")
    out_dir = Path(config.out_dir)
    _prepare_out_dir(config, out_dir)
    rows: list[dict] = []
    for seed in config.seeds():
        trace, _ = run_single(config, seed)
        write_trace_csv(trace, out_dir / f"seed-{seed}-trace.csv")
        for u in u_values:
            iteration = first_crossing(trace, u)
            rows.append(
                {
                    "criterion": f"gradstop_u={u:g}",
                    "seed": seed,
                    "iteration": iteration,
                    "test_loss": trace.value_at("test_loss", iteration),
                    "test_accuracy": trace.value_at("test_acc", iteration),
                    "train_loss": trace.value_at("train_loss", iteration),
                }
            )
    write_summary_csv(rows, out_dir / "sweep.csv")
    write_aggregate_csv(aggregate_summary(rows), out_dir / "sweep_aggregate.csv")
    return out_dir


def cmd_uncertainty(config: RunConfig) -> Path:
    """Train to budget, estimate per-parameter standard deviations from the
    final gradient matrix, and compare against a Metropolis chain on the same
    posterior (plus the exact values on quadratic models)."""
    out_dir = Path(config.out_dir)
    _prepare_out_dir(config, out_dir)
    seed = config.seed
    trace, setup = run_single(config, seed)
    write_trace_csv(trace, out_dir / "trace.csv")
    model = setup.model
    theta_final = trace.final_theta
    G = model.sample_gradients(theta_final)
    d = model.dim
    sigma_grad = np.empty(d)
    for j in range(d):
        basis = np.zeros(d)
        basis[j] = 1.0
        sigma_grad[j] = uncertainty_of(basis, G, kappa=config.kappa).sigma_f
    step_scale = config.mcmc_step_scale
    if step_scale is None:
        step_scale = tune_step_scale(model, seed=seed, initial=theta_final)
    chain = mcmc_run(
        model,
        n_samples=config.mcmc_samples,
        burn_in=config.mcmc_burn_in,
        step_scale=step_scale,
        seed=seed,
        thin=config.mcmc_thin,
        initial=theta_final,
    )
    sigma_mcmc = chain.marginal_std()
    names = setup.feature_names or [f"theta{j}" for j in range(d)]
    sigma_exact = setup.posterior.marginal_std() if setup.posterior is not None else None
    lines = ["parameter,sigma_gradstop,sigma_mcmc" + (",sigma_exact" if sigma_exact is not None else "")]
    for j in range(d):
        cells = [names[j], repr(float(sigma_grad[j])), repr(float(sigma_mcmc[j]))]
        if sigma_exact is not None:
            cells.append(repr(float(sigma_exact[j])))
        lines.append(",".join(cells))
    report = out_dir / "uncertainty.csv"
    report.write_text("\n".join(lines) + "\n", encoding="utf-8")
    sample_lines = [",".join(names)]
    sample_lines += [
        ",".join(repr(float(v)) for v in row) for row in chain.samples
    ]
    (out_dir / "mcmc_samples.csv").write_text(
        "\n".join(sample_lines) + "\n", encoding="utf-8"
    )
    meta = out_dir / "mcmc_info.txt"
    meta.write_text(
        f"acceptance_rate={chain.acceptance_rate!r}\n"
        f"step_scale={chain.step_scale!r}\n"
        f"tuning_warning={chain.tuning_warning or ''}\n",
        encoding="utf-8",
    )
    if chain.tuning_warning:
        log.warning("%s", chain.tuning_warning)
    return out_dir
