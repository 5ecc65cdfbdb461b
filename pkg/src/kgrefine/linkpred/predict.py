"""Scoring absent pairs with a fitted classifier, plus classifier
construction from a spec and pickle persistence."""

from __future__ import annotations

import pickle
from dataclasses import dataclass

import numpy as np

from .forest import RandomForestClassifier
from .gridsearch import grid_search
from .logreg import LogRegClassifier
from .svm import SVMClassifier

# hyperparameter grids used when the caller does not supply one
DEFAULT_GRIDS = {
    "logreg": {"C": [0.01, 0.1, 1.0, 10.0]},
    "svm": {"kernel": ["linear", "rbf"], "C": [0.1, 1.0, 10.0]},
    "random-forest": {
        "n_trees": [100, 300],
        "max_depth": [None, 10],
        "max_features": ["sqrt", "all"],
        "min_samples_split": [2, 5],
        "min_samples_leaf": [1, 2],
        "bootstrap": [True, False],
    },
}


@dataclass
class Prediction:
    rule: str
    factor: str
    score: float  # in [0, 1]
    label: int  # score >= 0.5

    @classmethod
    def from_score(cls, rule: str, factor: str, score: float) -> "Prediction":
        return cls(rule, factor, float(score), int(score >= 0.5))


def predict(classifier, rule: str, factor: str, feature: np.ndarray) -> Prediction:
    score = classifier.predict_proba(np.atleast_2d(feature))[0]
    return Prediction.from_score(rule, factor, score)


def make_classifier_factory(kind: str, seed: int = 0):
    if kind == "logreg":
        return lambda **p: LogRegClassifier(**p)
    if kind == "svm":
        def make_svm(**p):
            return SVMClassifier(seed=seed, **p)
        return make_svm
    if kind in ("random-forest", "rf"):
        def make_rf(**p):
            return RandomForestClassifier(seed=seed, **p)
        return make_rf
    raise ValueError(f"unknown classifier kind: {kind}")


def fit_classifier(kind: str, X, y, grid: dict | None = None,
                   folds: int = 10, seed: int = 0):
    """Grid-searched fit; returns (best params, fitted classifier)."""
    canonical = "random-forest" if kind == "rf" else kind
    grid = grid if grid is not None else DEFAULT_GRIDS[canonical]
    factory = make_classifier_factory(canonical, seed=seed)
    return grid_search(factory, grid, X, y, folds=folds, seed=seed)


def save_classifier(clf, path) -> None:
    with open(path, "wb") as fh:
        pickle.dump(clf, fh)


def load_classifier(path):
    with open(path, "rb") as fh:
        return pickle.load(fh)
