"""Per-iteration training traces and their CSV serialization.

Column order and float formatting are fixed so that identical runs produce
byte-identical files (floats use Python's shortest round-trip repr; missing
values are empty cells).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "TRACE_COLUMNS",
    "SUMMARY_COLUMNS",
    "CriterionTrace",
    "write_trace_csv",
    "write_summary_csv",
    "write_aggregate_csv",
]

TRACE_COLUMNS = [
    "t",
    "train_loss",
    "val_loss",
    "test_loss",
    "train_acc",
    "test_acc",
    "z",
    "s_hat",
    "exact_s",
    "eb",
    "gsnr",
    "sign",
    "cos",
    "gd",
    "flags",
]

SUMMARY_COLUMNS = [
    "criterion",
    "seed",
    "iteration",
    "test_loss",
    "test_accuracy",
    "train_loss",
]

AGGREGATE_COLUMNS = [
    "criterion",
    "n_seeds",
    "test_loss_mean",
    "test_loss_std",
    "test_accuracy_mean",
    "test_accuracy_std",
    "iteration_mean",
]


@dataclass
class CriterionTrace:
    """One training run: per-iteration records plus per-criterion outcomes.

    ``records`` holds one dict per iteration (keys are a subset of
    TRACE_COLUMNS); ``outcomes`` maps criterion name to its stop/best
    iteration (1-based).
    """

    records: list[dict]
    outcomes: dict[str, int] = field(default_factory=dict)
    final_theta: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        """Numeric column as a float array with NaN for missing entries."""
        out = np.full(len(self.records), math.nan)
        for i, rec in enumerate(self.records):
            value = rec.get(name)
            if value is not None and not isinstance(value, str):
                out[i] = float(value)
        return out

    def value_at(self, name: str, iteration: int) -> float:
        """Column value at a 1-based iteration (NaN when missing)."""
        if not 1 <= iteration <= len(self.records):
            raise IndexError(f"iteration {iteration} outside trace of length {len(self)}")
        value = self.records[iteration - 1].get(name)
        if value is None or isinstance(value, str):
            return math.nan
        return float(value)


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return ""
    return repr(value)


def write_trace_csv(trace: CriterionTrace, path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for rec in trace.records:
            writer.writerow([_format_cell(rec.get(col)) for col in TRACE_COLUMNS])


def write_summary_csv(rows: list[dict], path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SUMMARY_COLUMNS)
        for row in rows:
            writer.writerow([_format_cell(row.get(col)) for col in SUMMARY_COLUMNS])


def write_aggregate_csv(rows: list[dict], path) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(AGGREGATE_COLUMNS)
        for row in rows:
            writer.writerow([_format_cell(row.get(col)) for col in AGGREGATE_COLUMNS])


def aggregate_summary(rows: list[dict]) -> list[dict]:
    """Per-criterion mean/std of the summary rows, across seeds."""
    by_criterion: dict[str, list[dict]] = {}
    for row in rows:
        by_criterion.setdefault(row["criterion"], []).append(row)
    def _mean(values: np.ndarray) -> float:
        values = values[~np.isnan(values)]
        return float(values.mean()) if values.size else math.nan

    def _std(values: np.ndarray) -> float:
        values = values[~np.isnan(values)]
        return float(values.std()) if values.size else math.nan

    out = []
    for criterion, group in by_criterion.items():
        losses = np.array([r["test_loss"] for r in group], dtype=float)
        accs = np.array([r["test_accuracy"] for r in group], dtype=float)
        iters = np.array([r["iteration"] for r in group], dtype=float)
        out.append(
            {
                "criterion": criterion,
                "n_seeds": len(group),
                "test_loss_mean": _mean(losses),
                "test_loss_std": _std(losses),
                "test_accuracy_mean": _mean(accs),
                "test_accuracy_std": _std(accs),
                "iteration_mean": _mean(iters),
            }
        )
    return out
