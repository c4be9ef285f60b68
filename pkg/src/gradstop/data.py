"""CSV ingestion, train/validation/test splitting and feature standardization.

CSV contract: comma-separated, UTF-8, header row required, '.' decimal
separator. All non-label columns are parsed as numeric features; rows with a
missing or unparseable field are dropped (and the drop count logged), so the
ingested dataset never contains missing values. Standardization statistics are
fitted on the training rows only and applied everywhere - test rows never leak
into them.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

log = logging.getLogger(__name__)

__all__ = [
    "DataError",
    "MissingColumn",
    "EmptyDataset",
    "NonBinaryLabels",
    "Dataset",
    "Split",
    "load_csv",
    "split_standardize",
]

_MISSING_TOKENS = {"", "?", "na", "n/a", "nan", "null", "none"}


class DataError(Exception):
    pass


class MissingColumn(DataError):
    pass


class EmptyDataset(DataError):
    pass


class NonBinaryLabels(DataError):
    pass


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: list[str]
    # per-column (mean, scale) fitted on training rows; None before splitting
    standardization: tuple[np.ndarray, np.ndarray] | None = None

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]


@dataclass
class Split:
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray
    seed: int
    fractions: tuple[float, float, float]


def _parse_cell(cell: str) -> float | None:
    cell = cell.strip()
    if cell.lower() in _MISSING_TOKENS:
        return None
    try:
        value = float(cell)
    except ValueError:
        return None
    if not math.isfinite(value):
        return None
    return value


def load_csv(path, label_column: str, positive_label) -> Dataset:
    """Parse a CSV file into a numeric feature matrix and 0/1 labels.

    ``positive_label`` names the raw label value mapped to 1 (compared as a
    string); the label column must take exactly two distinct values among the
    retained rows.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyDataset(f"{path} is empty") from None
        if label_column not in header:
            raise MissingColumn(
                f"label column {label_column!r} not found in {path} "
                f"(columns: {header})"
            )
        label_pos = header.index(label_column)
        feature_names = [h for i, h in enumerate(header) if i != label_pos]
        rows: list[list[float]] = []
        labels_raw: list[str] = []
        dropped = 0
        for cells in reader:
            if not cells:
                continue
            if len(cells) != len(header):
                dropped += 1
                continue
            label_raw = cells[label_pos].strip()
            if label_raw.lower() in _MISSING_TOKENS:
                dropped += 1
                continue
            parsed = [
                _parse_cell(cell) for i, cell in enumerate(cells) if i != label_pos
            ]
            if any(value is None for value in parsed):
                dropped += 1
                continue
            rows.append(parsed)  # type: ignore[arg-type]
            labels_raw.append(label_raw)
    if dropped:
        log.warning("%s: dropped %d row(s) with missing/unparseable fields", path, dropped)
    if not rows:
        raise EmptyDataset(f"{path} has no usable data rows")
    distinct = sorted(set(labels_raw))
    if len(distinct) != 2:
        raise NonBinaryLabels(
            f"label column {label_column!r} must take exactly 2 values, "
            f"found {len(distinct)}: {distinct[:10]}"
        )
    positive = str(positive_label)
    if positive not in distinct:
        raise NonBinaryLabels(
            f"positive label {positive!r} not among observed labels {distinct}"
        )
    labels = np.array([1 if raw == positive else 0 for raw in labels_raw], dtype=np.int64)
    return Dataset(
        features=np.array(rows, dtype=np.float64),
        labels=labels,
        feature_names=feature_names,
    )


def split_standardize(
    ds: Dataset,
    fractions: tuple[float, float, float] = (0.64, 0.16, 0.20),
    seed: int = 0,
) -> tuple[Split, Dataset]:
    """Seeded shuffle + (train, val, test) split + train-fitted standardization.

    Training columns come out with mean 0 and standard deviation 1; constant
    columns are left at exactly 0 instead of dividing by zero. The same
    (mean, scale) transform is applied to every row.
    """
    fractions = tuple(float(f) for f in fractions)
    if len(fractions) != 3 or any(f < 0 for f in fractions):
        raise ValueError(f"fractions must be 3 non-negative floats, got {fractions}")
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise ValueError(f"fractions must sum to 1, got {fractions}")
    n = ds.n_rows
    perm = np.random.default_rng(seed).permutation(n)
    n_test = int(round(fractions[2] * n))
    n_val = int(round(fractions[1] * n))
    n_train = n - n_test - n_val
    if n_train < 2:
        raise ValueError(
            f"split leaves {n_train} training row(s); at least 2 are required"
        )
    train_idx = perm[:n_train]
    val_idx = perm[n_train : n_train + n_val]
    test_idx = perm[n_train + n_val :]
    train = ds.features[train_idx]
    mean = train.mean(axis=0)
    std = train.std(axis=0)
    scale = np.where(std > 1e-12, std, 1.0)
    standardized = Dataset(
        features=(ds.features - mean) / scale,
        labels=ds.labels.copy(),
        feature_names=list(ds.feature_names),
        standardization=(mean, scale),
    )
    split = Split(
        train_idx=train_idx,
        val_idx=val_idx,
        test_idx=test_idx,
        seed=seed,
        fractions=fractions,
    )
    return split, standardized
