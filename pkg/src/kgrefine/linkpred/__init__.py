from .sampling import (
    PairSample,
    positive_pairs,
    negative_pairs_random,
    negative_pairs_per_rule,
    negative_pairs_opposite,
    opposite_factor,
    factor_universe,
    featurize,
    build_dataset,
    save_dataset,
    load_dataset,
)
from .logreg import LogRegClassifier
from .svm import SVMClassifier
from .forest import DecisionTree, RandomForestClassifier
from .gridsearch import stratified_kfold, grid_search, cv_mean_f1
from .predict import Prediction, predict, save_classifier, load_classifier, fit_classifier

__all__ = [
    "PairSample", "positive_pairs", "negative_pairs_random",
    "negative_pairs_per_rule", "negative_pairs_opposite", "opposite_factor",
    "factor_universe",
    "featurize", "build_dataset", "save_dataset", "load_dataset",
    "LogRegClassifier", "SVMClassifier", "DecisionTree", "RandomForestClassifier",
    "stratified_kfold", "grid_search", "cv_mean_f1",
    "Prediction", "predict", "save_classifier", "load_classifier", "fit_classifier",
]
