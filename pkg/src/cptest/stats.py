"""Test statistics.

``statistic_w1`` and ``statistic_w2`` are the classification-probability
statistics; ``statistic_u``/``statistic_v`` are their oracle counterparts
computed from known densities; ``statistic_acc`` and ``statistic_mmd`` are the
accuracy and kernel baselines.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .classifiers import ClassifierSpec, ProbEstimate, fit_predict_proba
from .core import LabeledDataset, RngStream, as_sample_matrix
from .errors import (
    DegenerateBandwidth,
    DimensionMismatch,
    FoldTooSmall,
    InputError,
    LengthMismatch,
    PointOutsideSupportOfF,
)

TAGS = ("cpt1", "cpt2", "acc", "mmd")

Fitter = Callable[[LabeledDataset, np.ndarray], ProbEstimate]
ClassifierLike = Union[ClassifierSpec, Fitter]


@dataclass(frozen=True)
class StatisticKind:
    """Which statistic to compute and with what classifier.

    ``classifier`` may be a ``ClassifierSpec`` or any callable
    ``(train, eval_x) -> ProbEstimate``. ``mmd_bandwidth=None`` selects the
    median heuristic.
    """

    tag: str
    classifier: ClassifierLike | None = None
    acc_folds: int = 2
    mmd_bandwidth: float | None = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise InputError(f"unknown statistic {self.tag!r}; valid: {', '.join(TAGS)}")
        if self.tag != "mmd" and self.classifier is None:
            object.__setattr__(self, "classifier", ClassifierSpec())
        if self.tag == "acc" and self.acc_folds < 2:
            raise InputError("acc_folds must be at least 2")
        if self.mmd_bandwidth is not None and not self.mmd_bandwidth > 0:
            raise InputError("mmd_bandwidth must be positive")

    def fitter(self) -> Fitter:
        clf = self.classifier
        if isinstance(clf, ClassifierSpec):
            return lambda train, x: fit_predict_proba(clf, train, x)
        return clf

    @property
    def label(self) -> str:
        if self.tag == "mmd":
            return "mmd"
        clf = self.classifier
        name = clf.kind if isinstance(clf, ClassifierSpec) else getattr(clf, "name", "custom")
        return f"{self.tag}-{name}"


def _values(probs) -> np.ndarray:
    if isinstance(probs, ProbEstimate):
        return probs.values
    return np.asarray(probs, dtype=np.float64).ravel()


def statistic_w1(probs, n: int, m: int) -> float:
    """Mean estimated log-odds over the label-1 rows, minus ``log(n/m)``."""
    p = _values(probs)
    if p.shape[0] != n:
        raise LengthMismatch(f"expected {n} label-1 probabilities, got {p.shape[0]}")
    if n < 1 or m < 1:
        raise InputError("n and m must be positive")
    return float(np.mean(np.log(p) - np.log1p(-p)) - np.log(n / m))


def statistic_w2(probs) -> float:
    """Empirical variance (divisor N) of the estimated probabilities."""
    p = _values(probs)
    if p.shape[0] < 2:
        raise LengthMismatch("need at least two probabilities")
    return float(np.mean((p - p.mean()) ** 2))


@dataclass(frozen=True)
class OracleModel:
    """Known densities of both samples, as vectorised log-density callables
    mapping an ``(rows, d)`` array to ``rows`` values."""

    log_f: Callable[[np.ndarray], np.ndarray]
    log_g: Callable[[np.ndarray], np.ndarray]
    pi: float

    def __post_init__(self):
        if not 0 < self.pi < 1:
            raise InputError("pi must lie in (0, 1)")

    def probability(self, x) -> np.ndarray:
        """``P(Y=1 | x) = pi f / (pi f + (1 - pi) g)``."""
        x = as_sample_matrix(x)
        f = np.exp(self.log_f(x))
        g = np.exp(self.log_g(x))
        return self.pi * f / (self.pi * f + (1 - self.pi) * g)

    def log_odds(self, x) -> np.ndarray:
        x = as_sample_matrix(x)
        return np.log(self.pi) - np.log1p(-self.pi) + self.log_f(x) - self.log_g(x)


def _log_densities(oracle: OracleModel, points):
    x = as_sample_matrix(points, "points")
    return np.asarray(oracle.log_f(x), float), np.asarray(oracle.log_g(x), float)


def statistic_u(oracle: OracleModel, class1_points) -> float:
    """Oracle log-likelihood-ratio mean over label-1 points; estimates KL(f||g).

    Returns ``inf`` when a point lies outside the support of g.
    """
    lf, lg = _log_densities(oracle, class1_points)
    if np.any(np.isneginf(lf)):
        raise PointOutsideSupportOfF("a label-1 point has f(x) = 0")
    if np.any(np.isneginf(lg)):
        return float("inf")
    # the prior log-odds cancels against the log(n/m) centring
    return float(np.mean(lf - lg))


def statistic_v(oracle: OracleModel, class0_points) -> float:
    """Mirror of ``statistic_u`` over label-0 points; estimates KL(g||f)."""
    lf, lg = _log_densities(oracle, class0_points)
    if np.any(np.isneginf(lg)):
        raise PointOutsideSupportOfF("a label-0 point has g(x) = 0")
    if np.any(np.isneginf(lf)):
        return float("inf")
    return float(np.mean(lg - lf))


def stratified_folds(labels, folds: int, rng: RngStream) -> np.ndarray:
    """Fold index per row; each class is shuffled then dealt round-robin."""
    labels = np.asarray(labels)
    gen = rng.generator()
    assignment = np.empty(labels.shape[0], dtype=np.int64)
    for cls in (1, 0):
        idx = np.flatnonzero(labels == cls)
        # training part of every split needs >= 2 rows of this class
        if idx.size < folds or idx.size - -(-idx.size // folds) < 2:
            raise FoldTooSmall(
                f"class {cls} has {idx.size} rows, too few for {folds} folds"
            )
        idx = idx[gen.permutation(idx.size)]
        assignment[idx] = np.arange(idx.size) % folds
    return assignment


def statistic_acc(classifier: ClassifierLike, data: LabeledDataset, folds: int, rng: RngStream) -> float:
    """Cross-validated accuracy with stratified folds; p >= 1/2 predicts 1."""
    if folds < 2:
        raise InputError("folds must be at least 2")
    fit = StatisticKind("acc", classifier).fitter()
    assignment = stratified_folds(data.labels, folds, rng)
    scores = []
    for k in range(folds):
        held = assignment == k
        probs = fit(data.subset(~held), data.features[held])
        pred = (_values(probs) >= 0.5).astype(np.int64)
        scores.append(np.mean(pred == data.labels[held]))
    return float(np.mean(scores))


def median_heuristic(pooled) -> float:
    """Median Euclidean distance over all distinct pairs of rows."""
    x = as_sample_matrix(pooled)
    if x.shape[0] < 2:
        raise InputError("need at least two points for the median heuristic")
    sigma = float(np.median(pdist(x)))
    if sigma <= 0:
        raise DegenerateBandwidth("median pairwise distance is zero")
    return sigma


def gaussian_kernel(a, b, sigma: float) -> np.ndarray:
    return np.exp(-cdist(a, b, "sqeuclidean") / (2.0 * sigma * sigma))


def mmd_from_kernel(K: np.ndarray, labels) -> float:
    """Unbiased MMD^2 from a pooled kernel matrix and 0/1 labels."""
    y = np.asarray(labels, dtype=np.float64)
    z = 1.0 - y
    n = y.sum()
    m = z.sum()
    if n < 2 or m < 2:
        raise InputError("unbiased MMD needs at least two points per sample")
    diag = np.diag(K)
    within1 = (y @ K @ y - y @ diag) / (n * (n - 1))
    within0 = (z @ K @ z - z @ diag) / (m * (m - 1))
    cross = (y @ K @ z) / (n * m)
    return float(within1 + within0 - 2.0 * cross)


def statistic_mmd(sample1, sample0, bandwidth: float | None = None) -> float:
    """Unbiased squared MMD with kernel ``exp(-|x-y|^2 / (2 sigma^2))``.

    ``bandwidth=None`` uses the median heuristic on the pooled sample.
    """
    x1 = as_sample_matrix(sample1, "sample1")
    x0 = as_sample_matrix(sample0, "sample0")
    if x1.shape[1] != x0.shape[1]:
        raise DimensionMismatch(f"sample widths differ: {x1.shape[1]} vs {x0.shape[1]}")
    pooled = np.vstack([x1, x0])
    sigma = median_heuristic(pooled) if bandwidth is None else float(bandwidth)
    labels = np.r_[np.ones(len(x1)), np.zeros(len(x0))]
    return mmd_from_kernel(gaussian_kernel(pooled, pooled, sigma), labels)
