"""Bagged forests of greedy or lookahead trees.

Each tree trains on an independent bootstrap resample (size N, with
replacement) and sees per-node / per-block random feature subsets.  The
forest's probabilistic prediction is the unweighted mean of per-tree leaf
P+ values; a sample classifies POS only when that mean is strictly above
0.5.  Per-tree randomness comes from SeedSequence children of the master
seed, so training is deterministic for a fixed seed regardless of how many
parallel workers are used.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from .dataset import LabeledDataset, POS, NEG
from . import tree as tree_mod
from .tree import TreeParams, TreeNode, grow, iter_splits


class ForestError(ValueError):
    pass


@dataclass(frozen=True)
class ForestParams:
    n_trees: int = 100
    tree: TreeParams = field(default_factory=TreeParams)
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ForestError("n_trees must be >= 1")


@dataclass(frozen=True)
class Forest:
    trees: tuple
    params: ForestParams
    feature_names: tuple

    @property
    def n_features(self) -> int:
        return len(self.feature_names)


@dataclass(frozen=True)
class ImportanceReport:
    """Per-feature relative split frequency; all zero for a split-free forest."""

    feature_names: tuple
    frequencies: np.ndarray

    def as_dict(self) -> dict:
        return {n: float(f) for n, f in zip(self.feature_names, self.frequencies)}


def _train_one(X, y, tree_params, bootstrap, seed_seq):
    rng = np.random.default_rng(seed_seq)
    n = y.size
    if bootstrap:
        idx = rng.integers(0, n, size=n)
        return grow(X[idx], y[idx], tree_params, rng)
    return grow(X, y, tree_params, rng)


def fit(dataset: LabeledDataset, params: ForestParams, n_jobs: int = 1) -> Forest:
    """Train a forest of ``params.n_trees`` trees on independent bootstraps."""
    X, y = dataset.features, dataset.labels
    seeds = np.random.SeedSequence(params.seed).spawn(params.n_trees)
    if n_jobs == 1:
        trees = [
            _train_one(X, y, params.tree, params.bootstrap, s) for s in seeds
        ]
    else:
        trees = Parallel(n_jobs=n_jobs)(
            delayed(_train_one)(X, y, params.tree, params.bootstrap, s)
            for s in seeds
        )
    return Forest(tuple(trees), params, tuple(dataset.feature_names))


def _check_matrix(forest: Forest, X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != forest.n_features:
        raise ForestError(
            f"sample has {X.shape[1]} features, forest expects {forest.n_features}"
        )
    return X


def predict_proba(forest: Forest, samples) -> np.ndarray:
    """Forest P+ per sample: the mean of per-tree leaf P+ values."""
    X = _check_matrix(forest, samples)
    acc = np.zeros(X.shape[0])
    for t in forest.trees:
        acc += tree_mod.predict_proba_batch(t, X)
    return acc / len(forest.trees)


def classify(forest: Forest, samples) -> np.ndarray:
    """POS iff P+ > 0.5 (strict); exactly 0.5 classifies NEG."""
    p = predict_proba(forest, samples)
    return np.where(p > 0.5, POS, NEG).astype(np.int64)


def accuracy(forest: Forest, test: LabeledDataset) -> float:
    if test.n_samples == 0:
        raise ForestError("empty test set")
    return float(np.mean(classify(forest, test.features) == test.labels))


def feature_importance(forest: Forest) -> ImportanceReport:
    """Relative split counts: times each feature is split on, over all splits."""
    counts = np.zeros(forest.n_features)
    for t in forest.trees:
        for split in iter_splits(t):
            counts[split.feature_index] += 1
    total = counts.sum()
    freq = counts / total if total > 0 else counts
    return ImportanceReport(forest.feature_names, freq)


def feature_pair_frequency(forest: Forest) -> list:
    """Unordered (parent, child) feature pairs over all internal edges,
    ranked by relative frequency.  Guides the choice of heatmap axes."""
    counter: Counter = Counter()

    def rec(node):
        if isinstance(node, tree_mod.Leaf):
            return
        for child in (node.left, node.right):
            if isinstance(child, tree_mod.Internal):
                pair = tuple(
                    sorted((node.split.feature_index, child.split.feature_index))
                )
                counter[pair] += 1
            rec(child)

    for t in forest.trees:
        rec(t)
    total = sum(counter.values())
    if total == 0:
        return []
    ranked = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))
    return [(pair, count / total) for pair, count in ranked]


# ---------------------------------------------------------------------------
# persistence


def forest_to_dict(forest: Forest) -> dict:
    p = forest.params
    return {
        "format": "lookforest-model",
        "version": 1,
        "params": {
            "n_trees": p.n_trees,
            "bootstrap": p.bootstrap,
            "seed": p.seed,
            "tree": {
                "max_depth": p.tree.max_depth,
                "min_samples_leaf": p.tree.min_samples_leaf,
                "feature_subset_rule": p.tree.feature_subset_rule,
                "n_buckets": p.tree.n_buckets,
                "mode": p.tree.mode,
            },
        },
        "feature_names": list(forest.feature_names),
        "trees": [tree_mod.tree_to_dict(t) for t in forest.trees],
    }


def forest_from_dict(doc: dict) -> Forest:
    if doc.get("format") != "lookforest-model":
        raise ForestError("not a lookforest model document")
    tp = doc["params"]["tree"]
    params = ForestParams(
        n_trees=doc["params"]["n_trees"],
        tree=TreeParams(
            max_depth=tp["max_depth"],
            min_samples_leaf=tp["min_samples_leaf"],
            feature_subset_rule=tp["feature_subset_rule"],
            n_buckets=tp["n_buckets"],
            mode=tp["mode"],
        ),
        bootstrap=doc["params"]["bootstrap"],
        seed=doc["params"]["seed"],
    )
    trees = tuple(tree_mod.tree_from_dict(t) for t in doc["trees"])
    return Forest(trees, params, tuple(doc["feature_names"]))


def save_forest(forest: Forest, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(forest_to_dict(forest), fh, sort_keys=True, separators=(",", ":"))


def load_forest(path) -> Forest:
    with open(path, encoding="utf-8") as fh:
        return forest_from_dict(json.load(fh))
