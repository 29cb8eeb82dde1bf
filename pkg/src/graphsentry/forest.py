"""From-scratch CART decision trees and a bagged forest with Gini importances.

Splits minimize weighted Gini impurity over midpoint thresholds between
consecutive distinct sorted feature values; ties resolve to the lower
feature index, then the lower threshold. Samples route left when
value <= threshold. Nodes split while any valid split exists (pure nodes,
the depth limit, and the min_leaf constraint are the only stops), so
zero-gain splits are taken — required for XOR-style parity data.

Randomness: tree t draws its bootstrap and per-node feature subsets from a
stream seeded by (seed, t), so results are bit-identical regardless of
training order and growing a larger forest keeps the smaller one as a
prefix.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .validation import check_class_labels, check_feature_matrix, check_positive_int

FOREST_FORMAT = "graphsentry-forest"
FOREST_FORMAT_VERSION = 1


def gini_impurity(counts: Sequence[float]) -> float:
    """1 - sum((n_c / n)^2) over a class-count histogram."""
    counts = np.asarray(counts, dtype=np.float64)
    if counts.ndim != 1 or counts.size == 0:
        raise ValueError("counts must be a non-empty 1-D histogram")
    if np.any(counts < 0):
        raise ValueError("counts must be non-negative")
    total = counts.sum()
    if total <= 0:
        raise ValueError("counts must sum to a positive total")
    p = counts / total
    return float(1.0 - np.dot(p, p))


@dataclass
class TreeNode:
    """Internal node (feature/threshold/children) or leaf (class counts)."""

    n_samples: int
    counts: np.ndarray
    feature: int = -1
    threshold: float = 0.0
    decrease: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.left is None


def _best_split(X: np.ndarray, y: np.ndarray, n_classes: int,
                feature_ids: np.ndarray, min_leaf: int):
    """Best (decrease, feature, threshold) over midpoint candidates, or None.

    Features scanned in ascending index order and thresholds ascending, with
    strict improvement required to replace the incumbent, which realizes the
    (lower feature, lower threshold) tie rule.
    """
    n = y.shape[0]
    parent = gini_impurity(np.bincount(y, minlength=n_classes))
    best = None
    for f in np.sort(feature_ids):
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        cs = col[order]
        ys = y[order]
        cuts = np.nonzero(cs[1:] > cs[:-1])[0] + 1
        if cuts.size:
            cuts = cuts[(cuts >= min_leaf) & (n - cuts >= min_leaf)]
        if cuts.size == 0:
            continue
        onehot = np.zeros((n, n_classes))
        onehot[np.arange(n), ys] = 1.0
        cum = np.vstack([np.zeros(n_classes), np.cumsum(onehot, axis=0)])
        left = cum[cuts]
        right = cum[n] - left
        nl = cuts.astype(np.float64)
        nr = n - nl
        g_left = 1.0 - np.sum((left / nl[:, None]) ** 2, axis=1)
        g_right = 1.0 - np.sum((right / nr[:, None]) ** 2, axis=1)
        decrease = parent - (nl * g_left + nr * g_right) / n
        j = int(np.argmax(decrease))
        if best is None or decrease[j] > best[0]:
            thr = 0.5 * (cs[cuts[j] - 1] + cs[cuts[j]])
            if thr >= cs[cuts[j]]:
                # midpoint of adjacent floats can round up to the right value,
                # which would route every row left; fall back to the left value
                thr = float(cs[cuts[j] - 1])
            best = (float(decrease[j]), int(f), float(thr))
    return best


def grow_tree(X, y, n_classes: int | None = None, max_depth: int | None = None,
              min_leaf: int = 1, features_per_split: int | None = None,
              rng: np.random.Generator | int | None = None) -> TreeNode:
    """Train a single CART tree on (X, y); deterministic given the rng seed."""
    X = check_feature_matrix(X)
    y = check_class_labels(y, X.shape[0])
    if n_classes is None:
        n_classes = max(2, int(y.max()) + 1)
    elif y.size and y.max() >= n_classes:
        raise ValueError("labels exceed n_classes")
    n_features = X.shape[1]
    if features_per_split is None:
        features_per_split = math.ceil(math.sqrt(n_features))
    features_per_split = check_positive_int(features_per_split, "features_per_split")
    if features_per_split > n_features:
        raise ValueError(f"features_per_split {features_per_split} exceeds "
                         f"{n_features} features")
    min_leaf = check_positive_int(min_leaf, "min_leaf")
    if max_depth is not None:
        max_depth = check_positive_int(max_depth, "max_depth", minimum=0)
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)

    def build(idx: np.ndarray, depth: int) -> TreeNode:
        sub_y = y[idx]
        counts = np.bincount(sub_y, minlength=n_classes).astype(np.float64)
        node = TreeNode(n_samples=idx.shape[0], counts=counts)
        pure = np.count_nonzero(counts) <= 1
        depth_ok = max_depth is None or depth < max_depth
        if pure or not depth_ok or idx.shape[0] < 2 * min_leaf:
            return node
        feats = rng.choice(n_features, size=features_per_split, replace=False)
        found = _best_split(X[idx], sub_y, n_classes, feats, min_leaf)
        if found is None:
            return node
        node.decrease, node.feature, node.threshold = found
        mask = X[idx, node.feature] <= node.threshold
        if mask.all() or not mask.any():
            node.decrease, node.feature, node.threshold = 0.0, -1, 0.0
            return node
        node.left = build(idx[mask], depth + 1)
        node.right = build(idx[~mask], depth + 1)
        return node

    return build(np.arange(X.shape[0]), 0)


def tree_importances(root: TreeNode, n_features: int) -> np.ndarray:
    """Unnormalized Gini importance: sum of sample-fraction-weighted decreases."""
    out = np.zeros(n_features)
    total = root.n_samples

    def walk(node: TreeNode):
        if node.is_leaf:
            return
        out[node.feature] += (node.n_samples / total) * node.decrease
        walk(node.left)
        walk(node.right)

    walk(root)
    return out


def tree_predict_proba(root: TreeNode, X: np.ndarray) -> np.ndarray:
    n_classes = root.counts.shape[0]
    out = np.zeros((X.shape[0], n_classes))

    def walk(node: TreeNode, idx: np.ndarray):
        if idx.shape[0] == 0:
            return
        if node.is_leaf:
            out[idx] = node.counts / node.counts.sum()
            return
        mask = X[idx, node.feature] <= node.threshold
        walk(node.left, idx[mask])
        walk(node.right, idx[~mask])

    walk(root, np.arange(X.shape[0]))
    return out


def _tree_to_dict(node: TreeNode) -> dict:
    if node.is_leaf:
        return {"n": node.n_samples, "counts": [int(c) for c in node.counts]}
    return {
        "n": node.n_samples,
        "counts": [int(c) for c in node.counts],
        "feature": node.feature,
        "threshold": node.threshold,
        "decrease": node.decrease,
        "left": _tree_to_dict(node.left),
        "right": _tree_to_dict(node.right),
    }


def _tree_from_dict(d: dict) -> TreeNode:
    node = TreeNode(n_samples=int(d["n"]),
                    counts=np.asarray(d["counts"], dtype=np.float64))
    if "feature" in d:
        node.feature = int(d["feature"])
        node.threshold = float(d["threshold"])
        node.decrease = float(d["decrease"])
        node.left = _tree_from_dict(d["left"])
        node.right = _tree_from_dict(d["right"])
    return node


class GiniForestClassifier:
    """Bagged CART forest with averaged leaf-frequency probabilities.

    Estimator-style interface: construct with hyperparameters, call fit,
    then predict / predict_proba; feature_importances_ holds the per-feature
    mean importance normalized to sum to 1. When no tree ever splits, the
    importances fall back to uniform 1/F and importances_uniform_ is True.
    """

    def __init__(self, n_trees: int = 100, max_depth: int | None = None,
                 min_leaf: int = 1, features_per_split: int | None = None,
                 seed: int = 0, feature_names: Sequence[str] | None = None):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_leaf = min_leaf
        self.features_per_split = features_per_split
        self.seed = seed
        self.feature_names = list(feature_names) if feature_names is not None else None

    # estimator plumbing ---------------------------------------------------

    def get_params(self) -> dict:
        return {
            "n_trees": self.n_trees,
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "features_per_split": self.features_per_split,
            "seed": self.seed,
            "feature_names": self.feature_names,
        }

    def set_params(self, **params) -> "GiniForestClassifier":
        valid = self.get_params()
        for key, value in params.items():
            if key not in valid:
                raise ValueError(f"unknown parameter {key!r}")
            setattr(self, key, value)
        return self

    # training -------------------------------------------------------------

    def _tree_rng(self, t: int) -> np.random.Generator:
        return np.random.default_rng(np.random.SeedSequence(self.seed, spawn_key=(t,)))

    def fit(self, X, y) -> "GiniForestClassifier":
        X = check_feature_matrix(X)
        y = check_class_labels(y, X.shape[0])
        n_trees = check_positive_int(self.n_trees, "n_trees")
        self.n_features_ = X.shape[1]
        self.n_classes_ = max(2, int(y.max()) + 1)
        if self.feature_names is not None and len(self.feature_names) != self.n_features_:
            raise ValueError("feature_names length does not match features")

        self.trees_ = []
        raw = np.zeros(self.n_features_)
        n = X.shape[0]
        for t in range(n_trees):
            rng = self._tree_rng(t)
            boot = rng.integers(0, n, size=n)
            root = grow_tree(X[boot], y[boot], n_classes=self.n_classes_,
                             max_depth=self.max_depth, min_leaf=self.min_leaf,
                             features_per_split=self.features_per_split, rng=rng)
            self.trees_.append(root)
            raw += tree_importances(root, self.n_features_)
        raw /= n_trees
        total = raw.sum()
        if total > 0:
            self.feature_importances_ = raw / total
            self.importances_uniform_ = False
        else:
            self.feature_importances_ = np.full(self.n_features_, 1.0 / self.n_features_)
            self.importances_uniform_ = True
        return self

    # inference ------------------------------------------------------------

    def _check_fitted(self):
        if not hasattr(self, "trees_"):
            raise ValueError("classifier is not fitted")

    def predict_proba(self, X) -> np.ndarray:
        self._check_fitted()
        X = check_feature_matrix(X)
        if X.shape[1] != self.n_features_:
            raise ValueError(f"expected {self.n_features_} features, got {X.shape[1]}")
        acc = np.zeros((X.shape[0], self.n_classes_))
        for root in self.trees_:
            acc += tree_predict_proba(root, X)
        return acc / len(self.trees_)

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    # serialization ----------------------------------------------------------

    def to_json(self) -> dict:
        self._check_fitted()
        return {
            "format": FOREST_FORMAT,
            "format_version": FOREST_FORMAT_VERSION,
            "params": self.get_params(),
            "n_features": self.n_features_,
            "n_classes": self.n_classes_,
            "importances": [float(v) for v in self.feature_importances_],
            "importances_uniform": bool(self.importances_uniform_),
            "trees": [_tree_to_dict(t) for t in self.trees_],
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def from_json(cls, data: dict) -> "GiniForestClassifier":
        if data.get("format") != FOREST_FORMAT:
            raise ValueError("not a serialized forest")
        if data.get("format_version") != FOREST_FORMAT_VERSION:
            raise ValueError(f"unsupported forest format version "
                             f"{data.get('format_version')!r}")
        clf = cls(**data["params"])
        clf.n_features_ = int(data["n_features"])
        clf.n_classes_ = int(data["n_classes"])
        clf.feature_importances_ = np.asarray(data["importances"], dtype=np.float64)
        clf.importances_uniform_ = bool(data["importances_uniform"])
        clf.trees_ = [_tree_from_dict(t) for t in data["trees"]]
        return clf

    @classmethod
    def load(cls, path) -> "GiniForestClassifier":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))
