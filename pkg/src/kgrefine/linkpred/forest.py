"""CART decision trees with Gini splits and a bagged random forest.

Feature subsampling happens per split. Forest scores are vote fractions,
so they are always k/n_trees. Everything is deterministic for a fixed
seed.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateLabels, DimensionMismatch


class _TreeNode:
    __slots__ = ("feature", "threshold", "left", "right", "prediction")

    def __init__(self):
        self.feature = -1
        self.threshold = 0.0
        self.left = None
        self.right = None
        self.prediction = 0


def _gini_split(col: np.ndarray, y: np.ndarray, min_leaf: int):
    """Best threshold for one feature column, by weighted Gini of the
    (<= threshold, > threshold) partition. Returns (impurity, threshold)
    or None when no split satisfies min_leaf."""
    order = np.argsort(col, kind="stable")
    cs, ys = col[order], y[order]
    n = len(ys)
    pos_prefix = np.cumsum(ys)  # positives among the first k samples
    total_pos = pos_prefix[-1]
    ks = np.arange(1, n)  # left sizes
    boundary = cs[:-1] != cs[1:]  # can only cut between distinct values
    valid = boundary & (ks >= min_leaf) & ((n - ks) >= min_leaf)
    if not np.any(valid):
        return None
    lp = pos_prefix[:-1]
    left_gini = 1.0 - (lp / ks) ** 2 - ((ks - lp) / ks) ** 2
    rk = n - ks
    rp = total_pos - lp
    right_gini = 1.0 - (rp / rk) ** 2 - ((rk - rp) / rk) ** 2
    weighted = (ks * left_gini + rk * right_gini) / n
    weighted[~valid] = np.inf
    best = int(np.argmin(weighted))
    threshold = 0.5 * (cs[best] + cs[best + 1])
    return float(weighted[best]), threshold


def _resolve_max_features(spec, d: int) -> int:
    if spec in (None, "all"):
        return d
    if spec == "sqrt":
        return max(1, int(np.sqrt(d)))
    return min(int(spec), d)


class DecisionTree:
    def __init__(self, max_depth: int | None = None, min_samples_split: int = 2,
                 min_samples_leaf: int = 1, max_features="all", seed: int = 0):
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.seed = seed
        self.root = None
        self.n_features = None

    def fit(self, X: np.ndarray, y: np.ndarray, _check_labels: bool = True) -> "DecisionTree":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if _check_labels and len(np.unique(y)) < 2:
            raise DegenerateLabels("training labels contain a single class")
        self.n_features = X.shape[1]
        rng = np.random.default_rng(self.seed)
        k = _resolve_max_features(self.max_features, X.shape[1])
        self.root = self._grow(X, y, depth=0, rng=rng, k=k)
        return self

    def _grow(self, X, y, depth, rng, k):
        node = _TreeNode()
        pos = int(np.sum(y))
        # majority vote; ties go to the negative class for determinism
        node.prediction = 1 if pos * 2 > len(y) else 0
        if (pos == 0 or pos == len(y)
                or len(y) < self.min_samples_split
                or (self.max_depth is not None and depth >= self.max_depth)):
            return node
        features = np.sort(rng.choice(X.shape[1], size=k, replace=False))
        best = None
        for f in features:
            res = _gini_split(X[:, f], y, self.min_samples_leaf)
            if res is None:
                continue
            impurity, threshold = res
            if best is None or impurity < best[0] - 1e-15:
                best = (impurity, int(f), threshold)
        if best is None:
            return node
        _, node.feature, node.threshold = best
        mask = X[:, node.feature] <= node.threshold
        node.left = self._grow(X[mask], y[mask], depth + 1, rng, k)
        node.right = self._grow(X[~mask], y[~mask], depth + 1, rng, k)
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"expected {self.n_features} features, got {X.shape[1]}")
        out = np.empty(X.shape[0], dtype=np.int64)
        for i, row in enumerate(X):
            node = self.root
            while node.left is not None:
                node = node.left if row[node.feature] <= node.threshold else node.right
            out[i] = node.prediction
        return out


class RandomForestClassifier:
    def __init__(self, n_trees: int = 100, max_depth: int | None = None,
                 min_samples_split: int = 2, min_samples_leaf: int = 1,
                 max_features="sqrt", bootstrap: bool = True, seed: int = 0):
        self.n_trees = n_trees
        self.max_depth = max_depth
        self.min_samples_split = min_samples_split
        self.min_samples_leaf = min_samples_leaf
        self.max_features = max_features
        self.bootstrap = bootstrap
        self.seed = seed
        self.trees: list[DecisionTree] = []
        self.n_features = None

    def fit(self, X: np.ndarray, y: np.ndarray) -> "RandomForestClassifier":
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=np.int64)
        if len(np.unique(y)) < 2:
            raise DegenerateLabels("training labels contain a single class")
        self.n_features = X.shape[1]
        rng = np.random.default_rng(self.seed)
        self.trees = []
        for t in range(self.n_trees):
            tree_seed = int(rng.integers(2**63 - 1))
            if self.bootstrap:
                idx = np.random.default_rng(tree_seed).integers(len(y), size=len(y))
                Xt, yt = X[idx], y[idx]
            else:
                Xt, yt = X, y
            tree = DecisionTree(self.max_depth, self.min_samples_split,
                                self.min_samples_leaf, self.max_features,
                                seed=tree_seed)
            tree.fit(Xt, yt, _check_labels=False)
            self.trees.append(tree)
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.n_features:
            raise DimensionMismatch(
                f"expected {self.n_features} features, got {X.shape[1]}")
        votes = np.zeros(X.shape[0])
        for tree in self.trees:
            votes += tree.predict(X)
        return votes / self.n_trees

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba(X) >= 0.5).astype(int)
