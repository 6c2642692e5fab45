"""From-scratch classifiers behind one fit/predict contract.

Kinds: decision_tree (CART, gini or entropy), random_forest (bootstrap +
per-node feature sampling), knn (Euclidean), gaussian_nb. Every fit is a
pure function of (data, spec.seed); every prediction tie resolves to Hold.
"""

from stocksignals.classifiers.base import (
    KINDS,
    ClassifierSpec,
    ModelBundle,
    bundle_json,
    fit_bundle,
    fit_classifier,
    load_bundle,
    model_from_params,
    model_to_params,
    predict_batch,
    predict_one,
    save_bundle,
)
from stocksignals.classifiers.forest import ForestModel, fit_random_forest, predict_forest
from stocksignals.classifiers.gaussian_nb import (
    GaussianNbModel,
    class_log_scores,
    fit_gaussian_nb,
    predict_gaussian_nb,
)
from stocksignals.classifiers.knn import KnnModel, knn_predict
from stocksignals.classifiers.tree import (
    DecisionTree,
    Internal,
    Leaf,
    Split,
    best_split,
    entropy_impurity,
    fit_decision_tree,
    gini_impurity,
    predict_tree,
)

__all__ = [
    "KINDS",
    "ClassifierSpec",
    "ModelBundle",
    "DecisionTree",
    "ForestModel",
    "GaussianNbModel",
    "KnnModel",
    "Internal",
    "Leaf",
    "Split",
    "best_split",
    "bundle_json",
    "class_log_scores",
    "entropy_impurity",
    "fit_bundle",
    "fit_classifier",
    "fit_decision_tree",
    "fit_gaussian_nb",
    "fit_random_forest",
    "gini_impurity",
    "knn_predict",
    "load_bundle",
    "model_from_params",
    "model_to_params",
    "predict_batch",
    "predict_forest",
    "predict_gaussian_nb",
    "predict_one",
    "predict_tree",
    "save_bundle",
]
