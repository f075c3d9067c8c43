"""Classification-probability estimators ``p(x) = P(Y=1 | X=x)``."""

from __future__ import annotations

from ..core import LabeledDataset
from .base import ClassifierSpec, ProbEstimate, clip_probabilities, default_epsilon
from .forest import forest_fit_predict, forest_oob_proba
from .knn import knn_proba
from .logistic import fit_logistic, logistic_fit_predict, penalized_loss


def fit_predict_proba(spec: ClassifierSpec, train: LabeledDataset, eval_x) -> ProbEstimate:
    """Fit the classifier described by ``spec`` on ``train``; estimate p on ``eval_x``."""
    if spec.kind == "knn":
        return knn_proba(spec.knn_k, train, eval_x)
    if spec.kind == "logistic":
        return logistic_fit_predict(spec, train, eval_x)
    return forest_fit_predict(spec, train, eval_x)


__all__ = [
    "ClassifierSpec",
    "ProbEstimate",
    "clip_probabilities",
    "default_epsilon",
    "fit_logistic",
    "fit_predict_proba",
    "forest_fit_predict",
    "forest_oob_proba",
    "knn_proba",
    "logistic_fit_predict",
    "penalized_loss",
]
