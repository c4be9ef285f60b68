"""Command-line interface.

Subcommands::

    gradstop run          train once per seed with every stopping criterion
                          observed; writes trace.csv / summary.csv / aggregate.csv
    gradstop sweep        deterministic-threshold sweep over a u grid
    gradstop uncertainty  per-parameter standard deviations vs an MCMC chain

Configuration comes from a JSON file (--config), a named preset (--preset),
or both; command-line flags override either. The resolved configuration is
written to the output directory so any run can be reproduced exactly.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import ConfigError, RunConfig
from .data import DataError
from .harness import cmd_run, cmd_sweep, cmd_uncertainty

PRESETS: dict[str, dict] = {
    "quadratic": {"model": "quadratic"},
    "logistic-overfit": {
        "model": "logistic",
        "synthetic": "overfit",
        "prior_precision": 1e-8,
        "learning_rate": 1e-3,
    },
    "logistic-mcmc": {
        "model": "logistic",
        "synthetic": "mcmc-fixture",
        "prior_precision": 4.0,
        "validation": False,
        "budget": 2000,
    },
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gradstop",
        description="Early stopping of gradient descent from per-sample gradient statistics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("run", "train with all stopping criteria observed"),
        ("sweep", "sweep the deterministic stopping threshold u"),
        ("uncertainty", "compare gradient-based parameter uncertainty with MCMC"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--preset", choices=sorted(PRESETS), help="named preset config")
        p.add_argument("--out", help="output directory")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--n-seeds", type=int, dest="n_seeds", help="number of seeds")
        p.add_argument("--budget", type=int, help="iteration budget T")
        p.add_argument("--optimizer", choices=["gd", "adam"])
        p.add_argument("--learning-rate", type=float, dest="learning_rate")
        p.add_argument("--kappa", type=float, help="loss scale factor")
        p.add_argument("--u", type=float, help="deterministic stopping threshold")
        p.add_argument(
            "--mode",
            choices=["deterministic", "stochastic"],
            help="main criterion mode",
        )
        p.add_argument("--patience", type=int, help="baseline rule patience")
        p.add_argument(
            "--no-validation",
            action="store_true",
            help="disable the validation-set criterion (frees its split for training)",
        )
        p.add_argument("--dataset", help="CSV dataset path (logistic model)")
        p.add_argument("--label-column", dest="label_column")
        p.add_argument("--positive-label", dest="positive_label")
        p.add_argument("--prior-precision", type=float, dest="prior_precision")
        if name == "uncertainty":
            p.add_argument("--mcmc-samples", type=int, dest="mcmc_samples")
            p.add_argument("--mcmc-burn-in", type=int, dest="mcmc_burn_in")
            p.add_argument("--mcmc-thin", type=int, dest="mcmc_thin")
            p.add_argument("--mcmc-step-scale", type=float, dest="mcmc_step_scale")
        if name == "sweep":
            p.add_argument(
                "--u-grid",
                dest="u_grid",
                help="comma-separated thresholds, e.g. 0.1,0.2,0.3",
            )
    return parser


_FLAG_TO_FIELD = {
    "out": "out_dir",
    "seed": "seed",
    "n_seeds": "n_seeds",
    "budget": "budget",
    "optimizer": "optimizer",
    "learning_rate": "learning_rate",
    "kappa": "kappa",
    "u": "gradstop_u",
    "mode": "gradstop_mode",
    "patience": "baseline_patience",
    "dataset": "dataset_path",
    "label_column": "label_column",
    "positive_label": "positive_label",
    "prior_precision": "prior_precision",
    "mcmc_samples": "mcmc_samples",
    "mcmc_burn_in": "mcmc_burn_in",
    "mcmc_thin": "mcmc_thin",
    "mcmc_step_scale": "mcmc_step_scale",
}


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    values: dict = {}
    if args.config:
        values.update(dataclasses.asdict(RunConfig.from_file(args.config)))
    if args.preset:
        values.update(PRESETS[args.preset])
    if not args.config and not args.preset:
        raise ConfigError("provide --config and/or --preset")
    for flag, config_field in _FLAG_TO_FIELD.items():
        value = getattr(args, flag, None)
        if value is not None:
            values[config_field] = value
    if getattr(args, "no_validation", False):
        values["validation"] = False
    if getattr(args, "dataset", None):
        values["model"] = "logistic"
    if getattr(args, "u_grid", None):
        try:
            values["u_grid"] = [float(tok) for tok in args.u_grid.split(",") if tok.strip()]
        except ValueError as exc:
            raise ConfigError(f"bad --u-grid value: {exc}") from None
    return RunConfig(**values).validate()


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        if args.command == "run":
            out = cmd_run(config)
        elif args.command == "sweep":
            if not config.u_grid:
                raise ConfigError("sweep requires a non-empty --u-grid")
            out = cmd_sweep(config, config.u_grid)
        else:
            out = cmd_uncertainty(config)
    except (ConfigError, DataError, ValueError, OSError) as exc:
        print(f"gradstop: error: {exc}", file=sys.stderr)
        return 2
    print(out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
