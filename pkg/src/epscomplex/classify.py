"""Random-forest classifier with out-of-bag evaluation, plus a k-NN baseline.

Axis-aligned binary trees, Gini impurity, midpoint thresholds, grown to
purity (or min_leaf).  Tree t draws all of its randomness from
np.random.default_rng([seed, t]), so training is reproducible and could be
parallelized across trees without changing results.  Vote ties break toward
class A (the control class), which makes the FP/FN bookkeeping conservative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    BadParamsError,
    DegenerateCohortError,
    EmptyTrainError,
    NoOOBVotesError,
    SchemaMismatchError,
)
from .features import FeatureVector
from .ingest import Label

_GAIN_TOL = 1e-12


@dataclass(frozen=True)
class ForestConfig:
    """Forest hyperparameters.  features_per_split=None means floor(sqrt(d))."""

    n_trees: int = 500
    features_per_split: int | None = None
    min_leaf: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise BadParamsError(f"n_trees must be positive, got {self.n_trees}")
        if self.min_leaf < 1:
            raise BadParamsError(f"min_leaf must be positive, got {self.min_leaf}")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise BadParamsError("features_per_split must be positive when given")
        if self.seed < 0 or int(self.seed) != self.seed:
            raise BadParamsError(f"seed must be a nonnegative integer, got {self.seed}")


@dataclass(frozen=True)
class Prediction:
    label: Label
    votes: float


class _Tree:
    """Flat-array decision tree: leaf[i] is -1 for internal nodes, else 0/1."""

    __slots__ = ("feature", "threshold", "left", "right", "leaf", "depth")

    def __init__(self):
        self.feature = []
        self.threshold = []
        self.left = []
        self.right = []
        self.leaf = []
        self.depth = 0

    def add_node(self):
        self.feature.append(-1)
        self.threshold.append(0.0)
        self.left.append(-1)
        self.right.append(-1)
        self.leaf.append(-1)
        return len(self.leaf) - 1

    def predict_one(self, x) -> int:
        node = 0
        while self.leaf[node] < 0:
            node = self.left[node] if x[self.feature[node]] < self.threshold[node] else self.right[node]
        return self.leaf[node]

    def predict_many(self, X) -> np.ndarray:
        return np.fromiter((self.predict_one(row) for row in X), dtype=np.int64, count=len(X))

    @property
    def n_splits(self) -> int:
        return sum(1 for v in self.leaf if v < 0)


@dataclass(frozen=True)
class ForestModel:
    trees: tuple
    bootstrap_indices: tuple
    schema: tuple
    n_train: int


def _majority(n_b: int, n: int) -> int:
    # tie -> class A
    return 1 if 2 * n_b > n else 0


def _best_split(X, y, idx, feature_ids, min_leaf):
    """Exhaustive midpoint-threshold search, maximizing Gini gain.

    Ties break toward the earlier feature in draw order and the lower
    threshold, so the result is independent of anything but the inputs.
    """
    n = idx.size
    y_node = y[idx]
    n_b = int(y_node.sum())
    n_a = n - n_b
    parent = 1.0 - (n_a / n) ** 2 - (n_b / n) ** 2
    best_gain = _GAIN_TOL
    best = None
    for f in feature_ids:
        v = X[idx, f]
        order = np.argsort(v, kind="stable")
        vs = v[order]
        ys = y_node[order]
        cut_ok = vs[1:] > vs[:-1]
        if not cut_ok.any():
            continue
        n_left = np.arange(1, n)
        n_left_b = np.cumsum(ys)[:-1]
        if min_leaf > 1:
            cut_ok &= (n_left >= min_leaf) & (n - n_left >= min_leaf)
            if not cut_ok.any():
                continue
        n_right = n - n_left
        n_right_b = n_b - n_left_b
        gini_l = 1.0 - (n_left_b / n_left) ** 2 - ((n_left - n_left_b) / n_left) ** 2
        gini_r = 1.0 - (n_right_b / n_right) ** 2 - ((n_right - n_right_b) / n_right) ** 2
        gain = parent - (n_left * gini_l + n_right * gini_r) / n
        gain[~cut_ok] = -np.inf
        k = int(np.argmax(gain))
        if gain[k] > best_gain:
            best_gain = float(gain[k])
            best = (int(f), float((vs[k] + vs[k + 1]) / 2.0))
    return best


def _grow_tree(X, y, rng, mtry, min_leaf) -> _Tree:
    n_features = X.shape[1]
    tree = _Tree()
    root = tree.add_node()
    stack = [(root, np.arange(X.shape[0]), 0)]
    while stack:
        node, idx, depth = stack.pop()
        tree.depth = max(tree.depth, depth)
        y_node = y[idx]
        n_b = int(y_node.sum())
        n = idx.size
        split = None
        if 0 < n_b < n and n >= 2 * min_leaf:
            feats = rng.permutation(n_features)[:mtry]
            split = _best_split(X, y, idx, feats, min_leaf)
        if split is None:
            tree.leaf[node] = _majority(n_b, n)
            continue
        f, thr = split
        tree.feature[node] = f
        tree.threshold[node] = thr
        go_left = X[idx, f] < thr
        left = tree.add_node()
        right = tree.add_node()
        tree.left[node] = left
        tree.right[node] = right
        stack.append((right, idx[~go_left], depth + 1))
        stack.append((left, idx[go_left], depth + 1))
    return tree


def _as_matrix(features) -> tuple[np.ndarray, np.ndarray, tuple]:
    vectors = list(features)
    if not vectors:
        raise DegenerateCohortError("empty cohort")
    schema = vectors[0].names
    for vec in vectors:
        if vec.names != schema:
            raise SchemaMismatchError(
                f"subject {vec.subject_id!r} has features {vec.names}, expected {schema}"
            )
        if vec.label is None:
            raise DegenerateCohortError(f"subject {vec.subject_id!r} has no label")
    X = np.stack([vec.values for vec in vectors])
    y = np.array([1 if vec.label is Label.B else 0 for vec in vectors], dtype=np.int64)
    return X, y, schema


def train_forest(features, config: ForestConfig | None = None) -> ForestModel:
    """Train a seeded random forest on labeled feature vectors."""
    config = config or ForestConfig()
    X, y, schema = _as_matrix(features)
    n, d = X.shape
    counts = (int((y == 0).sum()), int((y == 1).sum()))
    if min(counts) < 2:
        raise DegenerateCohortError(
            f"need at least 2 subjects per class, got A={counts[0]}, B={counts[1]}"
        )
    mtry = config.features_per_split or max(1, int(math.isqrt(d)))
    if mtry > d:
        raise BadParamsError(f"features_per_split {mtry} exceeds feature count {d}")
    trees, boots = [], []
    for t in range(config.n_trees):
        rng = np.random.default_rng([config.seed, t])
        boot = rng.integers(0, n, size=n)
        trees.append(_grow_tree(X[boot], y[boot], rng, mtry, config.min_leaf))
        boots.append(np.sort(np.unique(boot)))
    return ForestModel(
        trees=tuple(trees), bootstrap_indices=tuple(boots), schema=schema, n_train=n
    )


def _vote_matrix(model: ForestModel, X: np.ndarray, oob_only: bool) -> np.ndarray:
    """(n, 2) vote counts; with oob_only, tree t only votes on subjects
    outside its bootstrap sample."""
    n = X.shape[0]
    votes = np.zeros((n, 2), dtype=np.int64)
    rows = np.arange(n)
    for tree, boot in zip(model.trees, model.bootstrap_indices):
        if oob_only:
            mask = np.ones(n, dtype=bool)
            mask[boot] = False
            if not mask.any():
                continue
            sel = rows[mask]
        else:
            sel = rows
        preds = tree.predict_many(X[sel])
        np.add.at(votes, (sel, preds), 1)
    return votes


def _triple_from_predictions(y, pred):
    from .evaluation import EvalTriple  # local import to avoid a module cycle

    accuracy = float((pred == y).mean())
    n_a = int((y == 0).sum())
    n_b = int((y == 1).sum())
    fp = float((pred[y == 0] == 1).mean()) if n_a else 0.0
    fn = float((pred[y == 1] == 0).mean()) if n_b else 0.0
    return EvalTriple(accuracy=accuracy, false_positive_rate=fp, false_negative_rate=fn)


def oob_report(model: ForestModel, features):
    """Out-of-bag EvalTriple: each subject judged only by trees that never
    saw it during training.  Requires the training cohort itself."""
    X, y, schema = _as_matrix(features)
    if schema != model.schema:
        raise SchemaMismatchError(f"features {schema} do not match model schema {model.schema}")
    if X.shape[0] != model.n_train:
        raise SchemaMismatchError(
            f"OOB evaluation needs the {model.n_train} training subjects, got {X.shape[0]}"
        )
    votes = _vote_matrix(model, X, oob_only=True)
    uncovered = np.flatnonzero(votes.sum(axis=1) == 0)
    if uncovered.size:
        sids = [list(features)[i].subject_id for i in uncovered]
        raise NoOOBVotesError(f"subject(s) {sids} appear in every bootstrap sample")
    pred = (votes[:, 1] > votes[:, 0]).astype(np.int64)  # tie -> A
    return _triple_from_predictions(y, pred)


def predict(model: ForestModel, vector: FeatureVector) -> Prediction:
    """Majority vote over all trees; ties go to class A."""
    if vector.names != model.schema:
        raise SchemaMismatchError(
            f"vector features {vector.names} do not match model schema {model.schema}"
        )
    counts = np.zeros(2, dtype=np.int64)
    for tree in model.trees:
        counts[tree.predict_one(vector.values)] += 1
    label = Label.B if counts[1] > counts[0] else Label.A
    return Prediction(label=label, votes=float(counts[1 if label is Label.B else 0] / counts.sum()))


def summarize_forest(model: ForestModel) -> str:
    """Plain-text model summary: tree count, depth stats, split counts."""
    depths = np.array([t.depth for t in model.trees])
    splits = np.array([t.n_splits for t in model.trees])
    return (
        f"trees: {len(model.trees)}\n"
        f"depth: min={depths.min()} median={np.median(depths):g} max={depths.max()}\n"
        f"splits: total={splits.sum()} mean={splits.mean():.2f}\n"
    )


def nn_baseline(train, test_vector: FeatureVector, k: int) -> Prediction:
    """k-nearest-neighbor vote on z-scored features (train statistics).

    Stands in for a second classifier next to the forest; k must be odd so
    two-class votes cannot tie.
    """
    X, y, schema = _as_matrix(train)
    if test_vector.names != schema:
        raise SchemaMismatchError(
            f"vector features {test_vector.names} do not match training schema {schema}"
        )
    if X.shape[0] == 0:
        raise EmptyTrainError("empty training set")
    if k < 1 or k % 2 == 0:
        raise BadParamsError(f"k must be a positive odd integer, got {k}")
    if k > X.shape[0]:
        raise BadParamsError(f"k={k} exceeds training size {X.shape[0]}")
    mu = X.mean(axis=0)
    sigma = X.std(axis=0)
    sigma[sigma == 0.0] = 1.0
    dist = np.linalg.norm((X - mu) / sigma - (test_vector.values - mu) / sigma, axis=1)
    nearest = np.argsort(dist, kind="stable")[:k]
    n_b = int(y[nearest].sum())
    label = Label.B if 2 * n_b > k else Label.A
    votes = n_b / k if label is Label.B else 1.0 - n_b / k
    return Prediction(label=label, votes=float(votes))


def forest_trainer(config: ForestConfig | None = None):
    """Trainer closure for the cross-validation harness."""
    base = config or ForestConfig()

    def train(train_features, seed: int):
        model = train_forest(train_features, replace(base, seed=int(seed)))
        return lambda vec: predict(model, vec).label

    return train


def nn_trainer(k: int):
    """Nearest-neighbor trainer closure for the cross-validation harness."""

    def train(train_features, seed: int):
        cohort = list(train_features)
        return lambda vec: nn_baseline(cohort, vec, k).label

    return train
