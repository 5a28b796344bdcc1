"""Grid search over forest hyperparameters via k-fold cross-validation.

Every reported experiment tunes its forests here first.  Selection
maximizes mean fold accuracy; ties prefer simpler models (smaller
max_depth, then larger min_samples_leaf, then fewer trees).
"""

from __future__ import annotations

import csv
import itertools
import json
import statistics
from dataclasses import dataclass, field

import numpy as np

from .dataset import LabeledDataset, make_folds
from . import forest as forest_mod
from .forest import ForestParams
from .tree import TreeParams, GREEDY, LOOKAHEAD, SQRT


class TuningError(ValueError):
    pass


@dataclass(frozen=True)
class ParamGrid:
    max_depth: tuple = (2,)
    min_samples_leaf: tuple = (1,)
    feature_subset_rule: tuple = (SQRT,)
    n_buckets: tuple = (30,)
    n_trees: tuple = (100,)

    def __post_init__(self):
        for name in (
            "max_depth",
            "min_samples_leaf",
            "feature_subset_rule",
            "n_buckets",
            "n_trees",
        ):
            values = getattr(self, name)
            if not values:
                raise TuningError(f"empty candidate list for {name}")
            object.__setattr__(self, name, tuple(values))

    def candidates(self, mode: str):
        """All grid points as TreeParams/n_trees pairs, in product order."""
        out = []
        for depth, msl, rule, buckets, n_trees in itertools.product(
            self.max_depth,
            self.min_samples_leaf,
            self.feature_subset_rule,
            self.n_buckets,
            self.n_trees,
        ):
            out.append(
                (
                    TreeParams(
                        max_depth=depth,
                        min_samples_leaf=msl,
                        feature_subset_rule=rule,
                        n_buckets=buckets,
                        mode=mode,
                    ),
                    n_trees,
                )
            )
        return out


@dataclass(frozen=True)
class CandidateScore:
    tree: TreeParams
    n_trees: int
    fold_scores: tuple

    @property
    def mean(self) -> float:
        return statistics.fmean(self.fold_scores)

    @property
    def std(self) -> float:
        if len(self.fold_scores) < 2:
            return 0.0
        return statistics.stdev(self.fold_scores)


@dataclass(frozen=True)
class CVResult:
    scores: tuple
    selected_index: int

    @property
    def selected(self) -> CandidateScore:
        return self.scores[self.selected_index]

    def selected_forest_params(self, seed: int, bootstrap: bool = True) -> ForestParams:
        sel = self.selected
        return ForestParams(
            n_trees=sel.n_trees, tree=sel.tree, bootstrap=bootstrap, seed=seed
        )


def _candidate_seed(master_seed: int, candidate: int, fold: int) -> int:
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(candidate, fold))
    return int(ss.generate_state(1)[0])


def cross_validate(
    dataset: LabeledDataset,
    grid: ParamGrid,
    n_folds: int,
    mode: str,
    seed: int,
    n_jobs: int = 1,
) -> CVResult:
    """Score every grid candidate by mean held-out fold accuracy."""
    if n_folds < 2:
        raise TuningError("n_folds must be >= 2")
    plan = make_folds(dataset.n_samples, n_folds, seed)
    scores = []
    for ci, (tree_params, n_trees) in enumerate(grid.candidates(mode)):
        fold_scores = []
        for fold in range(n_folds):
            train = dataset.subset(plan.train_indices(fold))
            held = dataset.subset(plan.fold_indices(fold))
            params = ForestParams(
                n_trees=n_trees,
                tree=tree_params,
                bootstrap=True,
                seed=_candidate_seed(seed, ci, fold),
            )
            model = forest_mod.fit(train, params, n_jobs=n_jobs)
            fold_scores.append(forest_mod.accuracy(model, held))
        scores.append(CandidateScore(tree_params, n_trees, tuple(fold_scores)))
    selected = min(
        range(len(scores)),
        key=lambda i: (
            -scores[i].mean,
            scores[i].tree.max_depth,
            -scores[i].tree.min_samples_leaf,
            scores[i].n_trees,
            i,
        ),
    )
    return CVResult(tuple(scores), selected)


def cv_result_to_csv(result: CVResult, path):
    """One row per candidate x fold."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "candidate",
                "max_depth",
                "min_samples_leaf",
                "feature_subset_rule",
                "n_buckets",
                "n_trees",
                "fold",
                "accuracy",
                "selected",
            ]
        )
        for ci, cand in enumerate(result.scores):
            for fold, acc in enumerate(cand.fold_scores):
                writer.writerow(
                    [
                        ci,
                        cand.tree.max_depth,
                        cand.tree.min_samples_leaf,
                        cand.tree.feature_subset_rule,
                        cand.tree.n_buckets,
                        cand.n_trees,
                        fold,
                        repr(acc),
                        int(ci == result.selected_index),
                    ]
                )


def cv_result_to_json(result: CVResult) -> dict:
    return {
        "selected_index": result.selected_index,
        "candidates": [
            {
                "max_depth": c.tree.max_depth,
                "min_samples_leaf": c.tree.min_samples_leaf,
                "feature_subset_rule": c.tree.feature_subset_rule,
                "n_buckets": c.tree.n_buckets,
                "n_trees": c.n_trees,
                "fold_scores": list(c.fold_scores),
                "mean": c.mean,
                "std": c.std,
            }
            for c in result.scores
        ],
    }
