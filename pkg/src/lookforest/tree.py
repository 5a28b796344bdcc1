"""Impurity math, greedy and depth-2 lookahead split search, tree growth.

Two induction modes share the same node/leaf structures:

* greedy -- classic recursive binary splitting; each node minimizes the
  sample-weighted child Gini on its own fresh random feature subset.
* lookahead -- trees grow in blocks of depth 2; the root split and both
  child splits of a block are chosen jointly to minimize the cumulative
  (unnormalized) Gini over the block's four leaves.  One feature subset is
  drawn per block and shared by all three of its nodes.

Joint block search is exact: conditional on the root split, the left child
only influences the two left leaves and the right child the two right
leaves, so optimizing each child independently per root candidate is
identical to enumerating every (root, left, right) triple.  The search is
vectorized over joint 2-D threshold histograms.

Routing rule everywhere: a sample goes right iff feature value >= threshold.
Ties in any search are broken lexicographically by (feature index,
threshold); "no split" orders after all splits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .dataset import quantile_values


class TreeError(ValueError):
    pass


GREEDY = "greedy"
LOOKAHEAD = "lookahead"

SQRT = "sqrt"
LOG2 = "log2"
ALL = "all"


@dataclass(frozen=True)
class ClassCounts:
    n_pos: int
    n_neg: int

    @property
    def total(self) -> int:
        return self.n_pos + self.n_neg


@dataclass(frozen=True)
class SplitSpec:
    feature_index: int
    threshold: float


@dataclass(frozen=True)
class Leaf:
    n_pos: int
    n_neg: int

    @property
    def p_plus(self) -> float:
        return self.n_pos / (self.n_pos + self.n_neg)


@dataclass(frozen=True)
class Internal:
    split: SplitSpec
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Internal]


@dataclass(frozen=True)
class BlockSpec:
    """Jointly chosen depth-2 block: root split plus optional child splits."""

    root: SplitSpec
    left: Optional[SplitSpec]
    right: Optional[SplitSpec]


@dataclass(frozen=True)
class TreeParams:
    max_depth: int = 2
    min_samples_leaf: int = 1
    feature_subset_rule: str = SQRT
    n_buckets: int = 30
    mode: str = GREEDY

    def __post_init__(self):
        if self.max_depth < 1:
            raise TreeError("max_depth must be >= 1")
        if self.min_samples_leaf < 1:
            raise TreeError("min_samples_leaf must be >= 1")
        if self.feature_subset_rule not in (SQRT, LOG2, ALL):
            raise TreeError(f"unknown feature subset rule {self.feature_subset_rule!r}")
        if self.n_buckets < 2:
            raise TreeError("n_buckets must be >= 2")
        if self.mode not in (GREEDY, LOOKAHEAD):
            raise TreeError(f"unknown mode {self.mode!r}")
        if self.mode == LOOKAHEAD and self.max_depth % 2 != 0:
            raise TreeError("lookahead mode requires an even max_depth")


def subset_size(rule: str, n_features: int) -> int:
    """Realized feature-subset size for a rule: ceil(sqrt), ceil(log2) or all."""
    if rule == SQRT:
        return min(n_features, math.ceil(math.sqrt(n_features)))
    if rule == LOG2:
        return min(n_features, max(1, math.ceil(math.log2(n_features))))
    if rule == ALL:
        return n_features
    raise TreeError(f"unknown feature subset rule {rule!r}")


# ---------------------------------------------------------------------------
# impurity


def gini(counts: ClassCounts) -> float:
    """Gini impurity 2*P+(1-P+) of a node; 0 when pure, 0.5 when balanced."""
    n = counts.total
    if n < 1:
        raise TreeError("gini of an empty node is undefined")
    # 2 * P+ * P- written over counts so it is exactly symmetric in floats
    return 2.0 * counts.n_pos * counts.n_neg / (n * n)


def weighted_gini(left: ClassCounts, right: ClassCounts) -> float:
    """Sample-weighted average Gini of two children: (n1 G1 + n2 G2)/(n1+n2)."""
    if left.total < 1 or right.total < 1:
        raise TreeError("weighted_gini requires two non-empty children")
    n1, n2 = left.total, right.total
    return (n1 * gini(left) + n2 * gini(right)) / (n1 + n2)


def cumulative_gini(leaves) -> float:
    """Unnormalized cumulative Gini over a block's four leaves: sum n_i G_i."""
    leaves = list(leaves)
    if len(leaves) != 4:
        raise TreeError("cumulative_gini expects exactly four leaves")
    return sum(c.total * gini(c) for c in leaves)


def _leaf_cost(pos, n):
    """Elementwise n*G = 2*pos*neg/n; zero for empty cells."""
    pos = np.asarray(pos, dtype=float)
    n = np.asarray(n, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        cost = 2.0 * pos * (n - pos) / n
    return np.where(n > 0, cost, 0.0)


# ---------------------------------------------------------------------------
# split search


def _binned(thresholds, values):
    # bin b means: exactly b thresholds are <= value, so for threshold index j
    # the left side (value < t[j]) is bins <= j.
    return np.searchsorted(thresholds, values, side="right")


def greedy_best_split(X, y, features, thresholds, min_samples_leaf=1):
    """Minimize the sample-weighted child Gini over (feature, threshold).

    ``thresholds`` maps feature index -> ascending candidate array.  Returns
    None when the node is pure or no candidate yields two children of at
    least ``min_samples_leaf`` samples.  Any admissible minimizer is accepted
    even when it does not reduce impurity.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    total_pos = float(y.sum())
    if total_pos == 0.0 or total_pos == n:
        return None
    best_score = np.inf
    best = None
    for f in sorted(features):
        t = np.asarray(thresholds.get(f, ()), dtype=float)
        if t.size == 0:
            continue
        bins = _binned(t, X[:, f])
        tot = np.bincount(bins, minlength=t.size + 1).astype(float)
        pos = np.bincount(bins, weights=y, minlength=t.size + 1)
        left_n = np.cumsum(tot)[:-1]
        left_pos = np.cumsum(pos)[:-1]
        right_n = n - left_n
        right_pos = total_pos - left_pos
        ok = (left_n >= min_samples_leaf) & (right_n >= min_samples_leaf)
        if not ok.any():
            continue
        score = (_leaf_cost(left_pos, left_n) + _leaf_cost(right_pos, right_n)) / n
        score = np.where(ok, score, np.inf)
        j = int(np.argmin(score))
        if score[j] < best_score:
            best_score = float(score[j])
            best = SplitSpec(f, float(t[j]))
    return best


def lookahead_best_block(X, y, features, thresholds, min_samples_leaf=1):
    """Exact joint minimizer of the cumulative four-leaf Gini of a depth-2 block.

    A child split is absent when its side is pure, too small to split, or no
    admissible split exists; an absent side contributes its own n*G.  Returns
    None when the node is pure or no admissible root split exists.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    msl = min_samples_leaf
    total_pos = float(y.sum())
    if total_pos == 0.0 or total_pos == n:
        return None
    feats = sorted(
        f for f in features if len(np.asarray(thresholds.get(f, ()))) > 0
    )
    if not feats:
        return None
    th = {f: np.asarray(thresholds[f], dtype=float) for f in feats}
    binned = {f: _binned(th[f], X[:, f]) for f in feats}

    best_gc = np.inf
    best = None
    for rf in feats:
        tr = th[rf]
        m = tr.size
        rb = binned[rf]
        tot = np.bincount(rb, minlength=m + 1).astype(float)
        pos = np.bincount(rb, weights=y, minlength=m + 1)
        left_n = np.cumsum(tot)[:-1]
        left_pos = np.cumsum(pos)[:-1]
        right_n = n - left_n
        right_pos = total_pos - left_pos
        ok = (left_n >= msl) & (right_n >= msl)
        if not ok.any():
            continue
        # cost of leaving each side as a leaf
        left_leaf = _leaf_cost(left_pos, left_n)
        right_leaf = _leaf_cost(right_pos, right_n)
        # best admissible child split per root threshold, per side
        bl_cost = np.full(m, np.inf)
        bl_f = np.full(m, -1)
        bl_j = np.zeros(m, dtype=np.int64)
        br_cost = np.full(m, np.inf)
        br_f = np.full(m, -1)
        br_j = np.zeros(m, dtype=np.int64)
        for cf in feats:
            tc = th[cf]
            mc = tc.size
            cb = binned[cf]
            flat = rb * (mc + 1) + cb
            size = (m + 1) * (mc + 1)
            joint = np.bincount(flat, minlength=size).astype(float)
            jpos = np.bincount(flat, weights=y, minlength=size)
            joint = joint.reshape(m + 1, mc + 1)
            jpos = jpos.reshape(m + 1, mc + 1)
            # S[a, b] = count(root_bin <= a, child_bin <= b)
            S = joint.cumsum(axis=0).cumsum(axis=1)
            Sp = jpos.cumsum(axis=0).cumsum(axis=1)
            col = joint.sum(axis=0).cumsum()
            col_p = jpos.sum(axis=0).cumsum()
            # left side leaves for root threshold j (rows) x child threshold (cols)
            L0n = S[:m, :mc]
            L0p = Sp[:m, :mc]
            L1n = left_n[:, None] - L0n
            L1p = left_pos[:, None] - L0p
            okL = (L0n >= msl) & (L1n >= msl)
            costL = np.where(okL, _leaf_cost(L0p, L0n) + _leaf_cost(L1p, L1n), np.inf)
            jL = np.argmin(costL, axis=1)
            vL = costL[np.arange(m), jL]
            upd = vL < bl_cost
            bl_cost[upd] = vL[upd]
            bl_f[upd] = cf
            bl_j[upd] = jL[upd]
            # right side
            R0n = col[None, :mc] - S[:m, :mc]
            R0p = col_p[None, :mc] - Sp[:m, :mc]
            R1n = right_n[:, None] - R0n
            R1p = right_pos[:, None] - R0p
            okR = (R0n >= msl) & (R1n >= msl)
            costR = np.where(okR, _leaf_cost(R0p, R0n) + _leaf_cost(R1p, R1n), np.inf)
            jR = np.argmin(costR, axis=1)
            vR = costR[np.arange(m), jR]
            upd = vR < br_cost
            br_cost[upd] = vR[upd]
            br_f[upd] = cf
            br_j[upd] = jR[upd]
        # a pure side always stays a leaf; otherwise a split ties ahead of no-split
        pure_l = left_leaf == 0.0
        pure_r = right_leaf == 0.0
        use_l = ~pure_l & (bl_cost <= left_leaf)
        use_r = ~pure_r & (br_cost <= right_leaf)
        contrib_l = np.where(use_l, bl_cost, left_leaf)
        contrib_r = np.where(use_r, br_cost, right_leaf)
        gc = np.where(ok, contrib_l + contrib_r, np.inf)
        j = int(np.argmin(gc))
        if gc[j] < best_gc:
            best_gc = float(gc[j])
            left = (
                SplitSpec(int(bl_f[j]), float(th[int(bl_f[j])][bl_j[j]]))
                if use_l[j]
                else None
            )
            right = (
                SplitSpec(int(br_f[j]), float(th[int(br_f[j])][br_j[j]]))
                if use_r[j]
                else None
            )
            best = BlockSpec(SplitSpec(rf, float(tr[j])), left, right)
    return best


def split_mask(X, split: SplitSpec):
    """Boolean mask of samples routed right (value >= threshold)."""
    return X[:, split.feature_index] >= split.threshold


def block_cost(X, y, block: BlockSpec) -> float:
    """Independent evaluation of the cumulative Gini a block achieves."""
    y = np.asarray(y, dtype=float)

    def side_cost(mask, child):
        ys = y[mask]
        if child is None:
            return float(_leaf_cost(ys.sum(), ys.size))
        cmask = split_mask(X[mask], child)
        yl, yr = ys[~cmask], ys[cmask]
        return float(_leaf_cost(yl.sum(), yl.size) + _leaf_cost(yr.sum(), yr.size))

    right = split_mask(X, block.root)
    return side_cost(~right, block.left) + side_cost(right, block.right)


# ---------------------------------------------------------------------------
# growth


def _node_thresholds(X, feats, n_buckets):
    n = X.shape[0]
    b = min(n_buckets, n)
    if b < 2:
        return {f: np.empty(0) for f in feats}
    return {f: quantile_values(X[:, f], b) for f in feats}


def _make_leaf(y) -> Leaf:
    n_pos = int(y.sum())
    return Leaf(n_pos, int(y.size) - n_pos)


def grow(X, y, params: TreeParams, rng: np.random.Generator) -> TreeNode:
    """Grow a tree on (X, y) with per-node (greedy) or per-block (lookahead)
    random feature subsets drawn from ``rng`` in depth-first order."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=np.int64)
    if y.size == 0:
        raise TreeError("cannot grow a tree on an empty sample")
    k = X.shape[1]
    k_sub = subset_size(params.feature_subset_rule, k)
    msl = params.min_samples_leaf

    def stopped(yn, depth_left):
        n = yn.size
        n_pos = int(yn.sum())
        return depth_left < 1 or n < 2 * msl or n_pos == 0 or n_pos == n

    def draw_feats():
        return sorted(int(f) for f in rng.choice(k, size=k_sub, replace=False))

    def grow_greedy(Xn, yn, depth_left):
        if stopped(yn, depth_left):
            return _make_leaf(yn)
        feats = draw_feats()
        th = _node_thresholds(Xn, feats, params.n_buckets)
        split = greedy_best_split(Xn, yn, feats, th, msl)
        if split is None:
            return _make_leaf(yn)
        right = split_mask(Xn, split)
        return Internal(
            split,
            grow_greedy(Xn[~right], yn[~right], depth_left - 1),
            grow_greedy(Xn[right], yn[right], depth_left - 1),
        )

    def grow_lookahead(Xn, yn, depth_left):
        if stopped(yn, depth_left) or depth_left < 2:
            return _make_leaf(yn)
        feats = draw_feats()
        th = _node_thresholds(Xn, feats, params.n_buckets)
        block = lookahead_best_block(Xn, yn, feats, th, msl)
        if block is None:
            return _make_leaf(yn)

        def side(mask, child):
            Xs, ys = Xn[mask], yn[mask]
            if child is None:
                return _make_leaf(ys)
            cmask = split_mask(Xs, child)
            return Internal(
                child,
                grow_lookahead(Xs[~cmask], ys[~cmask], depth_left - 2),
                grow_lookahead(Xs[cmask], ys[cmask], depth_left - 2),
            )

        right = split_mask(Xn, block.root)
        return Internal(block.root, side(~right, block.left), side(right, block.right))

    if params.mode == GREEDY:
        return grow_greedy(X, y, params.max_depth)
    return grow_lookahead(X, y, params.max_depth)


# ---------------------------------------------------------------------------
# prediction and serialization


def predict_proba(tree: TreeNode, sample) -> float:
    """P+ of the leaf a single sample routes to."""
    x = np.asarray(sample, dtype=float)
    if x.ndim != 1:
        raise TreeError("sample must be a 1-D feature vector")
    node = tree
    while isinstance(node, Internal):
        if node.split.feature_index >= x.size:
            raise TreeError("sample dimension smaller than tree expects")
        if x[node.split.feature_index] >= node.split.threshold:
            node = node.right
        else:
            node = node.left
    return node.p_plus


def predict_proba_batch(tree: TreeNode, X) -> np.ndarray:
    """Vectorized P+ for a matrix of samples."""
    X = np.asarray(X, dtype=float)
    out = np.empty(X.shape[0])

    def rec(node, idx):
        if isinstance(node, Leaf):
            out[idx] = node.p_plus
            return
        right = X[idx, node.split.feature_index] >= node.split.threshold
        rec(node.left, idx[~right])
        rec(node.right, idx[right])

    rec(tree, np.arange(X.shape[0]))
    return out


def tree_depth(tree: TreeNode) -> int:
    if isinstance(tree, Leaf):
        return 0
    return 1 + max(tree_depth(tree.left), tree_depth(tree.right))


def iter_splits(tree: TreeNode):
    """Yield every SplitSpec of a tree in depth-first preorder."""
    if isinstance(tree, Internal):
        yield tree.split
        yield from iter_splits(tree.left)
        yield from iter_splits(tree.right)


def tree_to_dict(tree: TreeNode) -> dict:
    if isinstance(tree, Leaf):
        return {"kind": "leaf", "n_pos": tree.n_pos, "n_neg": tree.n_neg}
    return {
        "kind": "split",
        "feature": tree.split.feature_index,
        "threshold": tree.split.threshold,
        "left": tree_to_dict(tree.left),
        "right": tree_to_dict(tree.right),
    }


def tree_from_dict(doc: dict) -> TreeNode:
    if doc["kind"] == "leaf":
        return Leaf(doc["n_pos"], doc["n_neg"])
    return Internal(
        SplitSpec(doc["feature"], doc["threshold"]),
        tree_from_dict(doc["left"]),
        tree_from_dict(doc["right"]),
    )
