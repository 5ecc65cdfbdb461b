"""Seeded stratified k-fold cross-validation and grid search.

The fold partition depends only on (labels, folds, seed), so the same
partition is reused across classifier kinds for a fair comparison.
"""

from __future__ import annotations

import itertools

import numpy as np

from ..errors import DegenerateLabels


def stratified_kfold(y: np.ndarray, folds: int, seed: int):
    """List of (train_idx, test_idx) with class proportions preserved."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    y = np.asarray(y)
    rng = np.random.default_rng(seed)
    assignments = np.empty(len(y), dtype=np.int64)
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        rng.shuffle(idx)
        assignments[idx] = np.arange(len(idx)) % folds
    splits = []
    for f in range(folds):
        test = np.flatnonzero(assignments == f)
        train = np.flatnonzero(assignments != f)
        splits.append((train, test))
    return splits


def positive_f1(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    tp = int(np.sum((y_true == 1) & (y_pred == 1)))
    fp = int(np.sum((y_true == 0) & (y_pred == 1)))
    fn = int(np.sum((y_true == 1) & (y_pred == 0)))
    denom = 2 * tp + fp + fn
    return 2 * tp / denom if denom else 0.0


def cv_mean_f1(make_classifier, params: dict, X, y, splits) -> float:
    scores = []
    for train, test in splits:
        if len(np.unique(y[train])) < 2:
            continue
        clf = make_classifier(**params)
        clf.fit(X[train], y[train])
        scores.append(positive_f1(y[test], clf.predict(X[test])))
    if not scores:
        raise DegenerateLabels("every fold was single-class")
    return float(np.mean(scores))


def expand_grid(grid: dict) -> list[dict]:
    if not grid:
        raise ValueError("hyperparameter grid must be non-empty")
    keys = sorted(grid)
    return [dict(zip(keys, combo))
            for combo in itertools.product(*(grid[k] for k in keys))]


def grid_search(make_classifier, grid: dict, X, y, folds: int = 10, seed: int = 0):
    """Best params by mean cv positive-class F1; ties keep the earlier cell.
    A single-cell grid skips cross-validation. Returns (params, fitted clf)."""
    cells = expand_grid(grid)
    if len(cells) == 1:
        best = cells[0]
    else:
        splits = stratified_kfold(y, folds, seed)
        best, best_score = None, -1.0
        for params in cells:
            score = cv_mean_f1(make_classifier, params, X, y, splits)
            if score > best_score + 1e-12:
                best, best_score = params, score
    clf = make_classifier(**best)
    clf.fit(X, y)
    return best, clf
