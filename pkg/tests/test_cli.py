import csv
import json
import math

import numpy as np
import pytest

from gradstop.cli import main
from gradstop.config import ConfigError, RunConfig
from gradstop.harness import cmd_run, cmd_sweep, cmd_uncertainty, first_crossing, run_single


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def quadratic_config(tmp_path, **overrides):
    values = dict(model="quadratic", quadratic_dim=6, quadratic_samples=40,
                  budget=60, out_dir=str(tmp_path / "out"))
    values.update(overrides)
    return RunConfig(**values).validate()


def logistic_config(tmp_path, **overrides):
    values = dict(model="logistic", synthetic="overfit", budget=50,
                  learning_rate=1e-3, prior_precision=1e-8,
                  out_dir=str(tmp_path / "out"))
    values.update(overrides)
    return RunConfig(**values).validate()


# --- config ------------------------------------------------------------------


def test_config_json_round_trip(tmp_path):
    cfg = quadratic_config(tmp_path, kappa=2.0, gradstop_u=0.3)
    text = cfg.to_json()
    again = RunConfig.from_json(text)
    assert again == cfg


def test_config_rejects_bad_values(tmp_path):
    with pytest.raises(ConfigError):
        quadratic_config(tmp_path, budget=0)
    with pytest.raises(ConfigError):
        quadratic_config(tmp_path, gradstop_u=1.5)
    with pytest.raises(ConfigError):
        quadratic_config(tmp_path, model="svm")
    with pytest.raises(ConfigError):
        RunConfig.from_json('{"mystery_knob": 3}')
    with pytest.raises(ConfigError):
        logistic_config(tmp_path, dataset_path="x.csv")  # no label column


def test_config_fractions_depend_on_validation(tmp_path):
    with_val = logistic_config(tmp_path)
    without = logistic_config(tmp_path, validation=False)
    assert with_val.fractions[2] == pytest.approx(0.2)
    assert with_val.fractions[1] == pytest.approx(0.16)
    assert without.fractions[1] == 0.0
    assert sum(with_val.fractions) == pytest.approx(1.0)


# --- run command ----------------------------------------------------------------


def test_cmd_run_quadratic_outputs(tmp_path):
    cfg = quadratic_config(tmp_path)
    out = cmd_run(cfg)
    assert (out / "config.json").exists()
    trace_rows = read_csv(out / "seed-0" / "trace.csv")
    assert len(trace_rows) == 60
    assert trace_rows[0]["t"] == "1"
    # the synthetic quadratic run carries the exact-credibility column
    assert all(r["exact_s"] != "" for r in trace_rows)
    summary = read_csv(out / "summary.csv")
    criteria = {row["criterion"] for row in summary}
    assert {"gradstop", "eb", "gsnr", "sign", "cos", "gd",
            "end_of_training"} <= criteria
    gradstop_row = next(r for r in summary if r["criterion"] == "gradstop")
    assert 1 <= int(gradstop_row["iteration"]) <= 60


def test_cmd_run_multi_seed_aggregate(tmp_path):
    cfg = logistic_config(tmp_path, n_seeds=3)
    out = cmd_run(cfg)
    summary = read_csv(out / "summary.csv")
    seeds = {row["seed"] for row in summary if row["criterion"] == "gradstop"}
    assert seeds == {"0", "1", "2"}
    agg = read_csv(out / "aggregate.csv")
    by_name = {row["criterion"]: row for row in agg}
    assert by_name["gradstop"]["n_seeds"] == "3"
    assert float(by_name["gradstop"]["test_loss_mean"]) > 0.0
    assert float(by_name["gradstop"]["test_loss_std"]) >= 0.0
    # validation criterion enabled by default for logistic runs
    assert "validation" in by_name


def test_cmd_run_stochastic_mode(tmp_path):
    cfg = quadratic_config(tmp_path, gradstop_mode="stochastic", budget=80)
    out = cmd_run(cfg)
    row = next(
        r for r in read_csv(out / "summary.csv") if r["criterion"] == "gradstop"
    )
    # the stochastic controller scans the whole budget and reports the best
    # match retrospectively
    assert 1 <= int(row["iteration"]) <= 80
    out2 = cmd_run(quadratic_config(tmp_path, gradstop_mode="stochastic",
                                    budget=80, out_dir=str(tmp_path / "again")))
    row2 = next(
        r for r in read_csv(out2 / "summary.csv") if r["criterion"] == "gradstop"
    )
    assert row2["iteration"] == row["iteration"]  # same seed, same draw


def test_cmd_run_is_byte_deterministic(tmp_path):
    cfg_a = quadratic_config(tmp_path, out_dir=str(tmp_path / "a"))
    cfg_b = quadratic_config(tmp_path, out_dir=str(tmp_path / "b"))
    out_a, out_b = cmd_run(cfg_a), cmd_run(cfg_b)
    assert (out_a / "seed-0" / "trace.csv").read_bytes() == (
        out_b / "seed-0" / "trace.csv"
    ).read_bytes()


def test_rerun_from_serialized_config_reproduces_trace(tmp_path):
    cfg = quadratic_config(tmp_path)
    out = cmd_run(cfg)
    reloaded = RunConfig.from_file(out / "config.json")
    reloaded.out_dir = str(tmp_path / "again")
    out2 = cmd_run(reloaded)
    assert (out / "seed-0" / "trace.csv").read_bytes() == (
        out2 / "seed-0" / "trace.csv"
    ).read_bytes()


# --- sweep command -----------------------------------------------------------------


def test_cmd_sweep_grid_rows(tmp_path):
    cfg = logistic_config(tmp_path, n_seeds=2)
    out = cmd_sweep(cfg, [0.1, 0.3, 0.5])
    rows = read_csv(out / "sweep.csv")
    assert len(rows) == 6  # 3 thresholds x 2 seeds
    names = {row["criterion"] for row in rows}
    assert names == {"gradstop_u=0.1", "gradstop_u=0.3", "gradstop_u=0.5"}


def test_cmd_sweep_singleton_matches_run(tmp_path):
    cfg = logistic_config(tmp_path, out_dir=str(tmp_path / "sweep"))
    out = cmd_sweep(cfg, [0.1])
    sweep_row = read_csv(out / "sweep.csv")[0]
    cfg2 = logistic_config(tmp_path, out_dir=str(tmp_path / "run"))
    out2 = cmd_run(cfg2)
    run_row = next(
        r for r in read_csv(out2 / "summary.csv") if r["criterion"] == "gradstop"
    )
    assert sweep_row["iteration"] == run_row["iteration"]
    assert sweep_row["test_loss"] == run_row["test_loss"]


def test_cmd_sweep_rejects_empty_or_invalid_grid(tmp_path):
    cfg = logistic_config(tmp_path)
    with pytest.raises(ValueError):
        cmd_sweep(cfg, [])
    with pytest.raises(ValueError):
        cmd_sweep(cfg, [0.1, 1.4])


def test_first_crossing_never_reached_returns_budget(tmp_path):
    cfg = quadratic_config(tmp_path, budget=5)
    trace, _ = run_single(cfg, seed=0)
    assert first_crossing(trace, 1.1 - 1e-12) in range(1, 6)
    # threshold above every s_hat: fall back to the end of the budget
    trace.records = [dict(r, s_hat=0.0) for r in trace.records]
    assert first_crossing(trace, 0.5) == 5


# --- uncertainty command --------------------------------------------------------------


def test_cmd_uncertainty_quadratic_matches_exact(tmp_path):
    cfg = quadratic_config(
        tmp_path,
        quadratic_dim=3,
        quadratic_samples=400,
        budget=200,
        mcmc_samples=4000,
        mcmc_burn_in=2000,
        mcmc_thin=5,
    )
    out = cmd_uncertainty(cfg)
    rows = read_csv(out / "uncertainty.csv")
    assert len(rows) == 3
    for row in rows:
        exact = float(row["sigma_exact"])
        assert float(row["sigma_gradstop"]) == pytest.approx(exact, rel=0.3)
        assert float(row["sigma_mcmc"]) == pytest.approx(exact, rel=0.3)
    info = (out / "mcmc_info.txt").read_text()
    assert "acceptance_rate" in info


def test_cmd_uncertainty_logistic_report_shape(tmp_path):
    cfg = logistic_config(
        tmp_path,
        synthetic="mcmc-fixture",
        prior_precision=4.0,
        validation=False,
        budget=300,
        mcmc_samples=1500,
        mcmc_burn_in=1000,
        mcmc_thin=2,
    )
    out = cmd_uncertainty(cfg)
    rows = read_csv(out / "uncertainty.csv")
    assert len(rows) == 12  # 11 features + bias
    assert rows[-1]["parameter"] == "bias"
    assert all(float(r["sigma_gradstop"]) > 0 for r in rows)
    samples = read_csv(out / "mcmc_samples.csv")
    assert len(samples) == cfg.mcmc_samples
    assert list(samples[0]) == [*["x%02d" % i for i in range(11)], "bias"]


def test_cmd_uncertainty_kappa_scaling(tmp_path):
    base = quadratic_config(
        tmp_path, quadratic_dim=3, quadratic_samples=50, budget=100,
        mcmc_samples=200, mcmc_burn_in=100, mcmc_thin=1,
        out_dir=str(tmp_path / "k1"),
    )
    doubled = quadratic_config(
        tmp_path, quadratic_dim=3, quadratic_samples=50, budget=100,
        mcmc_samples=200, mcmc_burn_in=100, mcmc_thin=1,
        kappa=2.0, out_dir=str(tmp_path / "k2"),
    )
    rows1 = read_csv(cmd_uncertainty(base) / "uncertainty.csv")
    rows2 = read_csv(cmd_uncertainty(doubled) / "uncertainty.csv")
    for r1, r2 in zip(rows1, rows2):
        assert float(r2["sigma_gradstop"]) == pytest.approx(
            float(r1["sigma_gradstop"]) / math.sqrt(2.0), abs=1e-10
        )


# --- command-line entry point -----------------------------------------------------


def test_cli_run_quadratic(tmp_path, capsys):
    code = main([
        "run", "--preset", "quadratic", "--out", str(tmp_path / "cli"),
        "--budget", "30", "--seed", "1",
    ])
    assert code == 0
    assert (tmp_path / "cli" / "seed-1" / "trace.csv").exists()


def test_cli_rejects_zero_budget(tmp_path, capsys):
    code = main([
        "run", "--preset", "quadratic", "--out", str(tmp_path / "x"),
        "--budget", "0",
    ])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_cli_requires_config_or_preset(capsys):
    assert main(["run"]) == 2


def test_cli_sweep_empty_grid_rejected(tmp_path, capsys):
    code = main([
        "sweep", "--preset", "quadratic", "--out", str(tmp_path / "x"),
        "--budget", "10",
    ])
    assert code == 2


def test_cli_config_file_with_overrides(tmp_path):
    cfg = quadratic_config(tmp_path, budget=20)
    path = tmp_path / "cfg.json"
    cfg.write(path)
    code = main([
        "run", "--config", str(path), "--out", str(tmp_path / "o2"),
        "--budget", "10",
    ])
    assert code == 0
    written = json.loads((tmp_path / "o2" / "config.json").read_text())
    assert written["budget"] == 10


def test_cli_uncertainty_smoke(tmp_path):
    code = main([
        "uncertainty", "--preset", "quadratic", "--out", str(tmp_path / "u"),
        "--budget", "50", "--mcmc-samples", "300", "--mcmc-burn-in", "300",
        "--mcmc-thin", "1",
    ])
    assert code == 0
    assert (tmp_path / "u" / "uncertainty.csv").exists()


def test_trace_has_no_silent_gaps(tmp_path):
    cfg = logistic_config(tmp_path, n_seeds=1, budget=40)
    trace, _ = run_single(cfg, seed=0)
    for column in ("train_loss", "val_loss", "test_loss", "eb", "gsnr",
                   "sign", "cos", "gd"):
        gaps = np.isnan(trace.column(column))
        assert not gaps.any(), column
    s_hat = trace.column("s_hat")
    flags = [r.get("flags", "") for r in trace.records]
    for idx in np.flatnonzero(np.isnan(s_hat)):
        assert flags[idx] == "degenerate_covariance"
