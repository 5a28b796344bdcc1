"""Readers for the published lookforest CSV/JSON output schemas.

Each reader validates the header before touching any data and returns plain
numpy/dict structures; nothing here imports the producing package, so the
two sides can evolve independently as long as the file formats hold.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import numpy as np


class SchemaError(ValueError):
    pass


def _open_rows(path, required, prefix_ok=()):
    """DictReader rows after header validation; returns (fieldnames, rows)."""
    if not os.path.exists(path):
        raise SchemaError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        names = reader.fieldnames or []
        missing = [c for c in required if c not in names]
        if missing:
            raise SchemaError(f"{path}: missing columns {', '.join(missing)}")
        extra = [
            c
            for c in names
            if c not in required and not any(c.startswith(p) for p in prefix_ok)
        ]
        if extra:
            raise SchemaError(f"{path}: unexpected columns {', '.join(extra)}")
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return names, rows


@dataclass(frozen=True)
class SweepTable:
    """Long-form sweep results: one row per (rho, classifier, repeat)."""

    rho: np.ndarray
    classifier: list
    accuracy: np.ndarray
    importance: np.ndarray  # (n_rows, n_features)
    feature_names: list

    def classifiers(self) -> list:
        seen = []
        for c in self.classifier:
            if c not in seen:
                seen.append(c)
        return seen

    def rho_values(self) -> np.ndarray:
        return np.unique(self.rho)

    def accuracy_stats(self, classifier: str):
        """(rho grid, mean accuracy, sample std) for one classifier."""
        rhos = self.rho_values()
        mask = np.array([c == classifier for c in self.classifier])
        means, stds = [], []
        for r in rhos:
            vals = self.accuracy[mask & (self.rho == r)]
            means.append(vals.mean())
            stds.append(vals.std(ddof=1) if vals.size > 1 else 0.0)
        return rhos, np.array(means), np.array(stds)

    def mean_importance(self, classifier: str):
        """(rho grid, (n_rho, n_features) mean importance) for one classifier."""
        rhos = self.rho_values()
        mask = np.array([c == classifier for c in self.classifier])
        out = np.empty((rhos.size, len(self.feature_names)))
        for i, r in enumerate(rhos):
            out[i] = self.importance[mask & (self.rho == r)].mean(axis=0)
        return rhos, out


def read_sweep(path) -> SweepTable:
    required = ["rho", "classifier", "repeat", "accuracy"]
    names, rows = _open_rows(path, required, prefix_ok=("importance_",))
    feature_names = [c[len("importance_"):] for c in names if c.startswith("importance_")]
    try:
        rho = np.array([float(r["rho"]) for r in rows])
        accuracy = np.array([float(r["accuracy"]) for r in rows])
        importance = np.array(
            [[float(r[f"importance_{f}"]) for f in feature_names] for r in rows]
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: non-numeric value ({exc})") from None
    return SweepTable(
        rho=rho,
        classifier=[r["classifier"] for r in rows],
        accuracy=accuracy,
        importance=importance.reshape(len(rows), len(feature_names)),
        feature_names=feature_names,
    )


@dataclass(frozen=True)
class EquityTable:
    dates: list
    positions: np.ndarray
    returns: np.ndarray
    equity: np.ndarray


def read_equity(path) -> EquityTable:
    _, rows = _open_rows(path, ["date", "position", "daily_return", "equity"])
    try:
        return EquityTable(
            dates=[r["date"] for r in rows],
            positions=np.array([int(r["position"]) for r in rows]),
            returns=np.array([float(r["daily_return"]) for r in rows]),
            equity=np.array([float(r["equity"]) for r in rows]),
        )
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: bad value ({exc})") from None


REPORT_METRICS = ("cagr", "sharpe", "success_rate", "mdd")


def read_report(path) -> dict:
    """Per-strategy metric dict from the backtest report JSON."""
    if not os.path.exists(path):
        raise SchemaError(f"no such file: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict) or not doc:
        raise SchemaError(f"{path}: expected a non-empty strategy mapping")
    for name, metrics in doc.items():
        missing = [m for m in REPORT_METRICS if m not in metrics]
        if missing:
            raise SchemaError(f"{path}: strategy {name!r} missing {', '.join(missing)}")
    return doc


@dataclass(frozen=True)
class HeatmapTable:
    x_name: str
    y_name: str
    x_centers: np.ndarray
    y_centers: np.ndarray
    grid: np.ndarray  # (len(y_centers), len(x_centers)) of P+

    def quadrant_means(self, x_cut: float = 0.5, y_cut: float = 0.5):
        """Mean P+ of the four quadrants around (x_cut, y_cut):
        returns ((low,low), (high,low), (low,high), (high,high))."""
        left = self.x_centers < x_cut
        below = self.y_centers < y_cut
        quads = []
        for ymask in (below, ~below):
            for xmask in (left, ~left):
                cell = self.grid[np.ix_(ymask, xmask)]
                quads.append(float(cell.mean()) if cell.size else float("nan"))
        return (quads[0], quads[1], quads[2], quads[3])


def read_heatmap(path) -> HeatmapTable:
    if not os.path.exists(path):
        raise SchemaError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header or len(header) != 3 or header[2] != "p_plus":
            raise SchemaError(f"{path}: expected header <feature_x>,<feature_y>,p_plus")
        x_name, y_name = header[0], header[1]
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    try:
        data = np.array([[float(v) for v in r] for r in rows])
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: non-numeric value ({exc})") from None
    xs = np.unique(data[:, 0])
    ys = np.unique(data[:, 1])
    if data.shape[0] != xs.size * ys.size:
        raise SchemaError(f"{path}: rows do not form a complete grid")
    grid = np.full((ys.size, xs.size), np.nan)
    xi = np.searchsorted(xs, data[:, 0])
    yi = np.searchsorted(ys, data[:, 1])
    grid[yi, xi] = data[:, 2]
    if np.isnan(grid).any():
        raise SchemaError(f"{path}: duplicate or missing grid cells")
    return HeatmapTable(x_name, y_name, xs, ys, grid)
