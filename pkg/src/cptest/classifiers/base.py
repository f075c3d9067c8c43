from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import LabeledDataset, as_sample_matrix
from ..errors import DimensionMismatch, InputError

KINDS = ("knn", "logistic", "forest")


@dataclass(frozen=True)
class ClassifierSpec:
    """Everything needed to reproduce a probability fit.

    ``forest_mtry=None`` means ``floor(sqrt(d))`` (at least 1).
    """

    kind: str = "forest"
    knn_k: int = 10
    logistic_l2: float = 1.0
    logistic_max_iter: int = 1000
    logistic_tol: float = 1e-6
    forest_trees: int = 500
    forest_mtry: int | None = None
    forest_min_leaf: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InputError(f"unknown classifier {self.kind!r}; valid: {', '.join(KINDS)}")
        if self.knn_k < 1:
            raise InputError("knn_k must be positive")
        if self.logistic_l2 < 0:
            raise InputError("logistic_l2 must be nonnegative")
        if self.logistic_max_iter < 1 or self.logistic_tol <= 0:
            raise InputError("logistic_max_iter and logistic_tol must be positive")
        if self.forest_trees < 1 or self.forest_min_leaf < 1:
            raise InputError("forest_trees and forest_min_leaf must be positive")
        if self.forest_mtry is not None and self.forest_mtry < 1:
            raise InputError("forest_mtry must be positive")


@dataclass(frozen=True)
class ProbEstimate:
    values: np.ndarray
    epsilon: float
    converged: bool = True

    def __len__(self):
        return self.values.shape[0]


def default_epsilon(N: int) -> float:
    return 1.0 / (2.0 * N)


def clip_probabilities(p, N: int, epsilon: float | None = None, converged: bool = True) -> ProbEstimate:
    eps = default_epsilon(N) if epsilon is None else float(epsilon)
    values = np.clip(np.asarray(p, dtype=np.float64), eps, 1.0 - eps)
    values.setflags(write=False)
    return ProbEstimate(values, eps, converged)


def check_eval(train: LabeledDataset, eval_x) -> np.ndarray:
    x = as_sample_matrix(eval_x, "eval")
    if x.shape[1] != train.d:
        raise DimensionMismatch(
            f"eval has {x.shape[1]} columns, training data has {train.d}"
        )
    return x
