"""Synthetic XOR data with a tunable signal-to-noise level.

The label of a sample agrees with the XOR of the two thresholded driver
features with probability ``rho``: at rho=1 the pattern is pure signal, at
rho=0.5 pure noise, and the Bayes-optimal accuracy is exactly rho.
Distractor columns are either uniform noise or weak shift-and-clamp linear
features.  ``run_sweep`` drives the accuracy-versus-rho experiment for the
three in-repo classifiers (lookahead forest, greedy forest, single greedy
tree), with cross-validated hyperparameters per cell.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .dataset import LabeledDataset, holdout_split
from . import forest as forest_mod
from .forest import ForestParams
from .tuning import ParamGrid, cross_validate
from .tree import GREEDY, LOOKAHEAD, SQRT, ALL

LRF = "lrf"  # forest of stepwise lookahead trees
GRF = "grf"  # forest of greedy trees
GDT = "gdt"  # single greedy tree
CLASSIFIERS = (LRF, GRF, GDT)


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    n_samples: int = 2000
    rho: float = 1.0
    n_noise: int = 6
    n_linear: int = 0
    beta: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if not 0.5 <= self.rho <= 1.0:
            raise SynthError(f"rho {self.rho} outside [0.5, 1]")
        if self.n_samples < 1:
            raise SynthError("n_samples must be >= 1")
        if self.n_noise < 0 or self.n_linear < 0:
            raise SynthError("distractor counts must be >= 0")
        if self.beta < 0:
            raise SynthError("beta must be >= 0")


def generate(config: SynthConfig) -> LabeledDataset:
    """Sample a dataset: two U[0,1] XOR drivers, then noise/linear distractors."""
    rng = np.random.default_rng(config.seed)
    n = config.n_samples
    f0 = rng.random(n)
    f1 = rng.random(n)
    differs = (f0 >= 0.5) != (f1 >= 0.5)
    bern = (rng.random(n) < config.rho).astype(np.int64)
    labels = np.where(differs, bern, 1 - bern)
    columns = [f0, f1]
    names = ["f0", "f1"]
    for i in range(config.n_noise):
        columns.append(rng.random(n))
        names.append(f"noise{i}")
    shift = config.beta * (2.0 * labels - 1.0)
    for i in range(config.n_linear):
        columns.append(np.clip(rng.random(n) + shift, 0.0, 1.0))
        names.append(f"linear{i}")
    return LabeledDataset(np.column_stack(columns), names, labels)


def bayes_accuracy(rho: float) -> float:
    """Accuracy of the oracle answering the XOR of the thresholded drivers."""
    if not 0.5 <= rho <= 1.0:
        raise SynthError(f"rho {rho} outside [0.5, 1]")
    return rho


# Reconstructed default grids; the source experiments do not publish theirs.
DEFAULT_GRIDS = {
    LRF: ParamGrid(
        max_depth=(2,),
        min_samples_leaf=(5,),
        feature_subset_rule=(SQRT, ALL),
        n_buckets=(30,),
        n_trees=(100,),
    ),
    GRF: ParamGrid(
        max_depth=(2, 4, 6),
        min_samples_leaf=(5,),
        feature_subset_rule=(SQRT, ALL),
        n_buckets=(30,),
        n_trees=(100,),
    ),
    GDT: ParamGrid(
        max_depth=(2, 4, 6),
        min_samples_leaf=(5, 25),
        feature_subset_rule=(ALL,),
        n_buckets=(30,),
        n_trees=(1,),
    ),
}


@dataclass(frozen=True)
class SweepCell:
    rho: float
    classifier: str
    repeat: int
    accuracy: float
    importance: np.ndarray


@dataclass(frozen=True)
class SweepResult:
    cells: tuple
    feature_names: tuple

    def accuracies(self, rho: float, classifier: str) -> np.ndarray:
        return np.array(
            [
                c.accuracy
                for c in self.cells
                if c.rho == rho and c.classifier == classifier
            ]
        )

    def mean_accuracy(self, rho: float, classifier: str) -> float:
        return float(self.accuracies(rho, classifier).mean())

    def mean_importance(self, rho: float, classifier: str) -> np.ndarray:
        rows = [
            c.importance
            for c in self.cells
            if c.rho == rho and c.classifier == classifier
        ]
        return np.mean(rows, axis=0)


def _classifier_mode(classifier: str) -> str:
    return LOOKAHEAD if classifier == LRF else GREEDY


def _cell_seed(master: int, *key) -> int:
    ss = np.random.SeedSequence(entropy=master, spawn_key=tuple(key))
    return int(ss.generate_state(1)[0])


def run_sweep(
    rho_values,
    config: SynthConfig,
    classifiers=CLASSIFIERS,
    n_repeats: int = 20,
    grids=None,
    n_folds: int = 5,
    train_fraction: float = 0.75,
    n_jobs: int = 1,
) -> SweepResult:
    """Accuracy and importance per (rho, classifier, repeat) cell.

    Each repeat draws a fresh dataset from a derived seed, splits 75/25,
    cross-validates each classifier's grid on the training part, refits the
    selected candidate and scores the held-out part.  Classifiers within one
    repeat share the dataset, so repeats are paired across classifiers.
    """
    if n_repeats < 1:
        raise SynthError("n_repeats must be >= 1")
    grids = dict(DEFAULT_GRIDS, **(grids or {}))
    cells = []
    feature_names = None
    for ri, rho in enumerate(rho_values):
        for rep in range(n_repeats):
            data_seed = _cell_seed(config.seed, 0, ri, rep)
            cell_cfg = SynthConfig(
                n_samples=config.n_samples,
                rho=rho,
                n_noise=config.n_noise,
                n_linear=config.n_linear,
                beta=config.beta,
                seed=data_seed,
            )
            data = generate(cell_cfg)
            feature_names = tuple(data.feature_names)
            train, test = holdout_split(
                data, train_fraction, seed=_cell_seed(config.seed, 1, ri, rep)
            )
            for classifier in classifiers:
                mode = _classifier_mode(classifier)
                cv_seed = _cell_seed(config.seed, 2, ri, rep, CLASSIFIERS.index(classifier))
                cv = cross_validate(
                    train, grids[classifier], n_folds, mode, cv_seed, n_jobs=n_jobs
                )
                params = cv.selected_forest_params(
                    seed=_cell_seed(config.seed, 3, ri, rep, CLASSIFIERS.index(classifier))
                )
                model = forest_mod.fit(train, params, n_jobs=n_jobs)
                cells.append(
                    SweepCell(
                        rho=float(rho),
                        classifier=classifier,
                        repeat=rep,
                        accuracy=forest_mod.accuracy(model, test),
                        importance=forest_mod.feature_importance(model).frequencies,
                    )
                )
    return SweepResult(tuple(cells), feature_names)


def sweep_to_csv(result: SweepResult, path):
    """Long-form CSV: rho, classifier, repeat, accuracy, one column per feature."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["rho", "classifier", "repeat", "accuracy"]
            + [f"importance_{n}" for n in result.feature_names]
        )
        for c in result.cells:
            writer.writerow(
                [repr(c.rho), c.classifier, c.repeat, repr(c.accuracy)]
                + [repr(float(v)) for v in c.importance]
            )


def sweep_summary(result: SweepResult) -> dict:
    """Mean/std accuracy per (rho, classifier) for the summary JSON."""
    out = {}
    for c in result.cells:
        out.setdefault((c.rho, c.classifier), []).append(c.accuracy)
    return {
        "cells": [
            {
                "rho": rho,
                "classifier": clf,
                "n_repeats": len(accs),
                "mean_accuracy": float(np.mean(accs)),
                "std_accuracy": float(np.std(accs, ddof=1)) if len(accs) > 1 else 0.0,
            }
            for (rho, clf), accs in sorted(out.items())
        ]
    }
