"""The three figure kinds: sweep curves, equity overlays, P+ heatmaps.

Rendering is read-only over its inputs and idempotent; every figure is
written as both PNG and SVG next to the requested output stem.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from . import schemas
from .schemas import SchemaError

KINDS = ("sweep", "equity", "heatmap")


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple
    output: str
    report: str | None = None  # equity only: backtest report JSON
    title: str | None = None
    labels: tuple = ()  # optional per-input label overrides

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}")
        if not self.inputs:
            raise SchemaError("at least one input CSV is required")
        if self.labels and len(self.labels) != len(self.inputs):
            raise SchemaError("labels must match inputs one-to-one")


def spec_from_json(path) -> FigureSpec:
    if not os.path.exists(path):
        raise SchemaError(f"no such spec file: {path}")
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    known = {"kind", "inputs", "output", "report", "title", "labels"}
    extra = set(doc) - known
    if extra:
        raise SchemaError(f"{path}: unknown spec keys {sorted(extra)}")
    for key in ("kind", "inputs", "output"):
        if key not in doc:
            raise SchemaError(f"{path}: missing spec key {key!r}")
    return FigureSpec(
        kind=doc["kind"],
        inputs=tuple(doc["inputs"]),
        output=doc["output"],
        report=doc.get("report"),
        title=doc.get("title"),
        labels=tuple(doc.get("labels", ())),
    )


def _save(fig, output: str) -> list:
    """Write PNG and SVG siblings of the output stem; returns the paths."""
    stem, ext = os.path.splitext(output)
    if ext.lower() in (".png", ".svg"):
        output = stem
    os.makedirs(os.path.dirname(os.path.abspath(output)), exist_ok=True)
    paths = [f"{output}.png", f"{output}.svg"]
    for p in paths:
        fig.savefig(p, bbox_inches="tight")
    plt.close(fig)
    return paths


def render_sweep(spec: FigureSpec) -> list:
    """Mean accuracy vs rho with +-1 std bars, plus a feature-importance panel."""
    table = schemas.read_sweep(spec.inputs[0])
    fig, (ax_acc, ax_imp) = plt.subplots(
        2, 1, figsize=(7, 8), sharex=True, height_ratios=[3, 2]
    )
    for clf in table.classifiers():
        rhos, means, stds = table.accuracy_stats(clf)
        ax_acc.errorbar(rhos, means, yerr=stds, marker="o", capsize=3, label=clf)
    rho_grid = table.rho_values()
    ax_acc.plot(rho_grid, rho_grid, color="gray", linestyle=":", label="bayes ceiling")
    ax_acc.axhline(0.5, color="gray", linewidth=0.8)
    ax_acc.set_ylabel("test accuracy")
    ax_acc.legend()

    linestyles = ["-", "--", "-.", ":"]
    cmap = plt.get_cmap("tab10")
    for ci, clf in enumerate(table.classifiers()):
        rhos, imp = table.mean_importance(clf)
        for fi, name in enumerate(table.feature_names):
            ax_imp.plot(
                rhos,
                imp[:, fi],
                color=cmap(fi % 10),
                linestyle=linestyles[ci % len(linestyles)],
                label=f"{clf}: {name}" if rhos.size else None,
            )
    ax_imp.set_xlabel("signal-to-noise level rho")
    ax_imp.set_ylabel("mean importance")
    if len(table.feature_names) * len(table.classifiers()) <= 12:
        ax_imp.legend(fontsize=7, ncol=2)
    if spec.title:
        fig.suptitle(spec.title)
    return _save(fig, spec.output)


def _metric_legend(name: str, report: dict | None) -> str:
    if not report or name not in report:
        return name
    m = report[name]
    return (
        f"{name} (CAGR {m['cagr']:.1%}, Sharpe {m['sharpe']:.2f}, "
        f"SR {m['success_rate']:.1%}, MDD {m['mdd']:.1%})"
    )


def _equity_label(path: str) -> str:
    stem = os.path.splitext(os.path.basename(path))[0]
    return stem[len("equity_"):] if stem.startswith("equity_") else stem


def render_equity(spec: FigureSpec) -> list:
    """Overlayed compound equity curves with a metric legend."""
    report = schemas.read_report(spec.report) if spec.report else None
    fig, ax = plt.subplots(figsize=(8, 5))
    for i, path in enumerate(spec.inputs):
        table = schemas.read_equity(path)
        label = spec.labels[i] if spec.labels else _equity_label(path)
        x = np.arange(table.equity.size)
        ax.plot(x, table.equity, label=_metric_legend(label, report))
    ax.set_xlabel("out-of-sample day")
    ax.set_ylabel("equity (start = 1)")
    ax.axhline(1.0, color="gray", linewidth=0.8)
    ax.legend(fontsize=8)
    if spec.title:
        ax.set_title(spec.title)
    return _save(fig, spec.output)


def render_heatmap(spec: FigureSpec) -> list:
    """P+ over a feature-pair grid, axes named after the two features."""
    table = schemas.read_heatmap(spec.inputs[0])
    fig, ax = plt.subplots(figsize=(6, 5))
    xs, ys = table.x_centers, table.y_centers

    def edges(c):
        if c.size == 1:
            return np.array([c[0] - 0.5, c[0] + 0.5])
        mid = (c[:-1] + c[1:]) / 2
        return np.concatenate([[2 * c[0] - mid[0]], mid, [2 * c[-1] - mid[-1]]])

    mesh = ax.pcolormesh(
        edges(xs), edges(ys), table.grid, cmap="RdYlGn", vmin=0.0, vmax=1.0
    )
    fig.colorbar(mesh, ax=ax, label="P+")
    ax.set_xlabel(table.x_name)
    ax.set_ylabel(table.y_name)
    if spec.title:
        ax.set_title(spec.title)
    return _save(fig, spec.output)


_RENDERERS = {
    "sweep": render_sweep,
    "equity": render_equity,
    "heatmap": render_heatmap,
}


def render(spec: FigureSpec) -> list:
    """Render one figure; returns the written image paths (PNG then SVG)."""
    return _RENDERERS[spec.kind](spec)
