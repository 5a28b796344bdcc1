"""Data containers, CSV ingestion, quantile thresholds, splits and fold plans.

Everything downstream (trees, forests, tuning, the backtest) works off the
``LabeledDataset`` defined here.  Labels are strictly binary: POS (1) and
NEG (0).  All containers are immutable after construction and safe to share
across parallel workers.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, field

import numpy as np

POS = 1
NEG = 0


class DatasetError(ValueError):
    """Raised for malformed input data or invalid split/fold parameters."""


@dataclass(frozen=True)
class LabeledDataset:
    """An N x k feature matrix with named columns and a binary label vector."""

    features: np.ndarray
    feature_names: list[str]
    labels: np.ndarray

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=float)
        labels = np.asarray(self.labels)
        if feats.ndim != 2:
            raise DatasetError("features must be a 2-D matrix")
        n, k = feats.shape
        if n < 1 or k < 1:
            raise DatasetError("empty dataset")
        if labels.shape != (n,):
            raise DatasetError(
                f"label count {labels.shape} does not match row count {n}"
            )
        if not np.all(np.isfinite(feats)):
            raise DatasetError("non-finite feature value")
        if len(set(self.feature_names)) != k or len(self.feature_names) != k:
            raise DatasetError("feature names must be unique and match column count")
        if not np.all((labels == POS) | (labels == NEG)):
            raise DatasetError("labels must be binary (POS=1 / NEG=0)")
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "labels", labels.astype(np.int64))
        self.features.setflags(write=False)
        self.labels.setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "LabeledDataset":
        idx = np.asarray(indices)
        return LabeledDataset(
            self.features[idx], list(self.feature_names), self.labels[idx]
        )


@dataclass(frozen=True)
class QuantileThresholds:
    """Candidate split values for one feature: distinct interpolated quantiles."""

    feature_index: int
    thresholds: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.thresholds, dtype=float)
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise DatasetError("thresholds must be strictly increasing")
        object.__setattr__(self, "thresholds", t)
        self.thresholds.setflags(write=False)


@dataclass(frozen=True)
class FoldPlan:
    """A partition of N samples into near-equal cross-validation folds."""

    n_folds: int
    assignments: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=np.int64)
        sizes = np.bincount(a, minlength=self.n_folds)
        if self.n_folds < 2 or sizes.max() - sizes.min() > 1:
            raise DatasetError("fold sizes must differ by at most one")
        object.__setattr__(self, "assignments", a)
        self.assignments.setflags(write=False)

    def fold_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.assignments == fold)[0]

    def train_indices(self, fold: int) -> np.ndarray:
        return np.nonzero(self.assignments != fold)[0]


def load_feature_csv(
    path,
    label_column: str,
    pos_token: str = "1",
    neg_token: str = "0",
) -> LabeledDataset:
    """Read a feature CSV (header row mandatory) into a LabeledDataset.

    All columns except ``label_column`` become features, in header order.
    The label column may only contain the two configured tokens.
    """
    if not os.path.exists(path):
        raise DatasetError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError("empty dataset") from None
        if label_column not in header:
            raise DatasetError(f"missing label column {label_column!r}")
        label_pos = header.index(label_column)
        feature_names = [h for i, h in enumerate(header) if i != label_pos]
        rows, tokens = [], []
        for line_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DatasetError(f"row {line_no}: expected {len(header)} cells")
            tokens.append(row[label_pos])
            vals = []
            for i, cell in enumerate(row):
                if i == label_pos:
                    continue
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise DatasetError(
                        f"row {line_no}: non-numeric value {cell!r} "
                        f"in column {header[i]!r}"
                    ) from None
            rows.append(vals)
    if not rows:
        raise DatasetError("empty dataset")
    distinct = sorted(set(tokens))
    if len(distinct) > 2:
        raise DatasetError(f"label cardinality {len(distinct)}")
    mapping = {pos_token: POS, neg_token: NEG}
    unknown = [t for t in distinct if t not in mapping]
    if unknown:
        raise DatasetError(f"unmapped label token {unknown[0]!r}")
    labels = np.array([mapping[t] for t in tokens], dtype=np.int64)
    return LabeledDataset(np.array(rows, dtype=float), feature_names, labels)


def save_feature_csv(dataset: LabeledDataset, path, label_column: str = "label"):
    """Write a dataset in the same schema load_feature_csv consumes."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(dataset.feature_names) + [label_column])
        for row, label in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def quantile_values(values: np.ndarray, n_buckets: int) -> np.ndarray:
    """Distinct interpolated j/B quantiles (j=1..B-1) of a value array."""
    n = len(values)
    if not 2 <= n_buckets <= n:
        raise DatasetError(f"bucket count {n_buckets} out of range [2, {n}]")
    qs = np.arange(1, n_buckets) / n_buckets
    return np.unique(np.quantile(values, qs, method="linear"))


def quantile_thresholds(
    dataset: LabeledDataset, feature_index: int, n_buckets: int
) -> QuantileThresholds:
    """Candidate thresholds for one feature: the empirical j/B quantiles.

    Duplicate quantile values collapse, so fewer than B-1 thresholds are
    possible (a constant feature yields none).
    """
    values = dataset.features[:, feature_index]
    return QuantileThresholds(feature_index, quantile_values(values, n_buckets))


def make_folds(n_samples: int, n_folds: int, seed: int) -> FoldPlan:
    """Randomly assign samples to n_folds near-equal folds, deterministically."""
    if not 2 <= n_folds <= n_samples:
        raise DatasetError(f"n_folds {n_folds} out of range [2, {n_samples}]")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_samples)
    assignments = np.empty(n_samples, dtype=np.int64)
    for fold, chunk in enumerate(np.array_split(perm, n_folds)):
        assignments[chunk] = fold
    return FoldPlan(n_folds, assignments)


def holdout_split(
    dataset: LabeledDataset,
    train_fraction: float,
    seed: int = 0,
    chronological: bool = False,
) -> tuple[LabeledDataset, LabeledDataset]:
    """Split into train/test parts.

    Random by default; with ``chronological`` the first ceil(f*N) rows are the
    training part, preserving order (for time series).
    """
    if not 0.0 < train_fraction < 1.0:
        raise DatasetError(f"train fraction {train_fraction} outside (0, 1)")
    n = dataset.n_samples
    n_train = math.ceil(train_fraction * n)
    if chronological:
        order = np.arange(n)
    else:
        order = np.random.default_rng(seed).permutation(n)
    return dataset.subset(order[:n_train]), dataset.subset(order[n_train:])
