"""Regression primitives built from scratch: closed-form ridge regression,
CART-style regression trees with variance-reduction splits, bagged forests,
and evaluation metrics.

Determinism contract: all randomness flows from ForestConfig.seed; per-tree
streams are derived from (seed, tree_index) so serial and parallel fits
produce bit-identical models.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class RankDeficientError(ValueError):
    """Raised when lambda = 0 meets rank-deficient features."""


@dataclass(eq=False)
class DesignMatrix:
    """n samples by d features plus late-minutes targets."""

    rows: np.ndarray
    targets: np.ndarray
    feature_names: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        self.rows = np.asarray(self.rows, dtype=float)
        self.targets = np.asarray(self.targets, dtype=float)
        if self.rows.ndim != 2:
            raise ValueError("rows must be a 2-D array")
        n, d = self.rows.shape
        if n < 1 or d < 1:
            raise ValueError("need at least one sample and one feature")
        if self.targets.shape != (n,):
            raise ValueError(f"targets shape {self.targets.shape} does not match {n} rows")
        if not np.all(np.isfinite(self.rows)) or not np.all(np.isfinite(self.targets)):
            raise ValueError("design matrix contains non-finite values")
        if self.feature_names and len(self.feature_names) != d:
            raise ValueError("feature_names length must match feature count")

    @property
    def n_samples(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]


@dataclass(eq=False)
class RidgeModel:
    """L2-regularized linear model with an unpenalized intercept."""

    weights: np.ndarray
    intercept: float
    lam: float


@dataclass(frozen=True, slots=True)
class TreeNode:
    """A regression-tree node: a leaf carries ``value``, an internal node
    carries (feature_index, threshold, left, right). Samples with
    feature <= threshold go left."""

    n_samples: int
    value: float | None = None
    feature_index: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.value is not None


@dataclass(frozen=True)
class ForestConfig:
    n_trees: int = 25
    max_depth: int | None = 8
    min_samples_leaf: int = 3
    feature_subsample_fraction: float = 1.0
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_trees < 1:
            raise ValueError("n_trees must be >= 1")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0 (or None for unbounded)")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")
        if not 0.0 < self.feature_subsample_fraction <= 1.0:
            raise ValueError("feature_subsample_fraction must be in (0, 1]")


@dataclass(eq=False)
class ForestModel:
    trees: list[TreeNode]
    config: ForestConfig

    def __post_init__(self) -> None:
        if len(self.trees) != self.config.n_trees:
            raise ValueError("tree count does not match config.n_trees")


@dataclass(frozen=True)
class EvalReport:
    rmse: float
    mae: float
    n_samples: int


# ---------------------------------------------------------------------------
# Ridge regression
# ---------------------------------------------------------------------------

def ridge_fit(data: DesignMatrix, lam: float) -> RidgeModel:
    """Solve the L2-regularized normal equations on mean-centered features.

    The intercept is unpenalized: features and targets are centered before
    the solve and the intercept recovered from the means, so the base delay
    level is never shrunk. Deterministic.
    """
    if not math.isfinite(lam) or lam < 0:
        raise ValueError("lambda must be finite and >= 0")
    X, y = data.rows, data.targets
    xbar = X.mean(axis=0)
    ybar = float(y.mean())
    Xc = X - xbar
    yc = y - ybar
    d = data.n_features
    if lam == 0.0 and np.linalg.matrix_rank(Xc) < d:
        raise RankDeficientError(
            "rank-deficient feature matrix with lambda = 0; use lambda > 0 to regularize"
        )
    weights = np.linalg.solve(Xc.T @ Xc + lam * np.eye(d), Xc.T @ yc)
    intercept = ybar - float(xbar @ weights)
    return RidgeModel(weights=weights, intercept=intercept, lam=lam)


def ridge_predict(model: RidgeModel, features: Sequence[float] | np.ndarray) -> float:
    x = np.asarray(features, dtype=float)
    if x.shape != model.weights.shape:
        raise ValueError(f"expected {model.weights.shape[0]} features, got {x.shape}")
    return float(x @ model.weights + model.intercept)


# ---------------------------------------------------------------------------
# Regression trees
# ---------------------------------------------------------------------------

def tree_fit(data: DesignMatrix, config: ForestConfig, rng: np.random.Generator) -> TreeNode:
    """Grow one tree by greedy variance reduction.

    Candidate thresholds are midpoints of sorted distinct values of each
    sampled feature; the split minimizing total child squared error wins,
    ties broken by lowest feature index then lowest threshold. Recursion
    stops at max_depth, min_samples_leaf, or zero target variance.
    """
    return _fit_node(data.rows, data.targets, 0, config, rng)


def _fit_node(X: np.ndarray, y: np.ndarray, depth: int, config: ForestConfig, rng: np.random.Generator) -> TreeNode:
    n = y.shape[0]
    leaf = lambda: TreeNode(n_samples=n, value=float(y.mean()))  # noqa: E731
    if config.max_depth is not None and depth >= config.max_depth:
        return leaf()
    msl = config.min_samples_leaf
    if n < 2 * msl or np.all(y == y[0]):
        return leaf()

    d = X.shape[1]
    k = max(1, math.ceil(config.feature_subsample_fraction * d))
    if k < d:
        features = np.sort(rng.choice(d, size=k, replace=False))
    else:
        features = np.arange(d)

    best_score = math.inf
    best_feature = -1
    best_threshold = 0.0
    for f in features:
        found, _, threshold = _best_split_on_feature(X[:, f], y, msl)
        if not found:
            continue
        # Re-score the feature's winning threshold on row-ordered children so
        # that identical partitions reached through different features compare
        # bit-equal and the lowest-feature tie rule is honored.
        mask = X[:, f] <= threshold
        nl = int(mask.sum())
        score = (nl * y[mask].var() + (n - nl) * y[~mask].var()) / n
        if score < best_score:
            best_score = score
            best_feature = int(f)
            best_threshold = threshold
    if best_feature < 0:
        return leaf()

    mask = X[:, best_feature] <= best_threshold
    left = _fit_node(X[mask], y[mask], depth + 1, config, rng)
    right = _fit_node(X[~mask], y[~mask], depth + 1, config, rng)
    return TreeNode(
        n_samples=n,
        feature_index=best_feature,
        threshold=best_threshold,
        left=left,
        right=right,
    )


def _cumulative_sse(ys: np.ndarray) -> np.ndarray:
    """Welford-style cumulative sum of squared deviations.

    Entry k is the SSE of ys[:k+1]; exact 0.0 for single-element prefixes,
    and far more stable than the csum-of-squares identity.
    """
    n = ys.shape[0]
    counts = np.arange(1, n + 1)
    means = np.cumsum(ys) / counts
    terms = np.empty(n)
    terms[0] = 0.0
    terms[1:] = (ys[1:] - means[:-1]) * (ys[1:] - means[1:])
    return np.cumsum(terms)


def _best_split_on_feature(values: np.ndarray, y: np.ndarray, msl: int) -> tuple[bool, float, float]:
    """Scan all midpoint thresholds of one feature in one sorted pass.

    Returns (found, total child SSE, threshold); the SSE ranking is
    equivalent to weighted child variance. First minimum wins, which is the
    lowest threshold since midpoints increase along the sorted order.
    """
    n = y.shape[0]
    order = np.argsort(values, kind="stable")
    v = values[order]
    ys = y[order]
    sizes = np.arange(1, n)
    valid = v[1:] != v[:-1]
    if msl > 1:
        valid &= (sizes >= msl) & (n - sizes >= msl)
    if not valid.any():
        return False, math.inf, 0.0
    sse_left = _cumulative_sse(ys)[:-1]
    sse_right = _cumulative_sse(ys[::-1])[n - 2 :: -1]
    sse = np.where(valid, sse_left + sse_right, math.inf)
    j = int(np.argmin(sse))
    return True, float(sse[j]), float((v[j] + v[j + 1]) / 2.0)


def tree_predict(node: TreeNode, features: Sequence[float] | np.ndarray) -> float:
    while not node.is_leaf:
        node = node.left if features[node.feature_index] <= node.threshold else node.right
    return node.value


# ---------------------------------------------------------------------------
# Forests
# ---------------------------------------------------------------------------

def tree_rng(seed: int, tree_index: int) -> np.random.Generator:
    """Independent stream for one tree, derived from (seed, tree_index)."""
    return np.random.default_rng(np.random.SeedSequence((seed & 0xFFFFFFFFFFFFFFFF, tree_index)))


def forest_fit(data: DesignMatrix, config: ForestConfig) -> ForestModel:
    """Fit config.n_trees trees, each on its own bootstrap resample (when
    enabled) with per-node feature subsampling. Identical seeds produce
    bit-identical models."""
    trees: list[TreeNode] = []
    n = data.n_samples
    for t in range(config.n_trees):
        rng = tree_rng(config.seed, t)
        if config.bootstrap:
            idx = rng.integers(0, n, size=n)
            sample = DesignMatrix(data.rows[idx], data.targets[idx], data.feature_names)
        else:
            sample = data
        trees.append(tree_fit(sample, config, rng))
    return ForestModel(trees=trees, config=config)


def forest_predict(model: ForestModel, features: Sequence[float] | np.ndarray) -> float:
    """Arithmetic mean of the individual tree predictions.

    Uses np.mean so the result is bit-identical to averaging the trees'
    predictions externally."""
    x = np.asarray(features, dtype=float)
    return float(np.mean([tree_predict(root, x) for root in model.trees]))


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

def rmse(predictions: Sequence[float] | np.ndarray, actuals: Sequence[float] | np.ndarray) -> EvalReport:
    p = np.asarray(predictions, dtype=float)
    a = np.asarray(actuals, dtype=float)
    if p.shape != a.shape or p.ndim != 1 or p.size == 0:
        raise ValueError("predictions and actuals must be equal-length nonempty vectors")
    err = p - a
    return EvalReport(
        rmse=float(np.sqrt(np.mean(err * err))),
        mae=float(np.mean(np.abs(err))),
        n_samples=p.size,
    )
