"""Label-permutation engine shared by all statistics."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import LabeledDataset, RngStream
from .errors import EmptyInput, InputError
from .stats import (
    StatisticKind,
    gaussian_kernel,
    median_heuristic,
    mmd_from_kernel,
    statistic_acc,
    statistic_w1,
    statistic_w2,
)


@dataclass(frozen=True)
class TestResult:
    __test__ = False  # not a pytest class

    statistic_kind: StatisticKind
    observed: float
    null_sample: np.ndarray
    p_value: float
    critical_value: float
    alpha: float
    num_permutations: int
    seed: int

    @property
    def reject(self) -> bool:
        return self.observed > self.critical_value


def permutation_p_value(observed: float, null_sample) -> float:
    null = np.asarray(null_sample, dtype=np.float64)
    return (1.0 + np.count_nonzero(null >= observed)) / (null.size + 1.0)


def critical_value(null_sample, alpha: float) -> float:
    """Upper-tail critical value: the ceil((1-alpha)(B+1))-th smallest null
    value, or ``inf`` when that rank exceeds B."""
    null = np.sort(np.asarray(null_sample, dtype=np.float64))
    B = null.size
    # rounding guards exact products such as 0.95 * 201 = 190.95
    k = math.ceil(round((1.0 - alpha) * (B + 1), 9))
    if k > B:
        return math.inf
    return float(null[max(k, 1) - 1])


def statistic_function(kind: StatisticKind, data: LabeledDataset):
    """Return ``f(labels, rng) -> float`` evaluating ``kind`` on a relabelling
    of ``data``. Label-independent work (the MMD kernel) is done once here."""
    if kind.tag == "mmd":
        sigma = median_heuristic(data.features) if kind.mmd_bandwidth is None else kind.mmd_bandwidth
        K = gaussian_kernel(data.features, data.features, sigma)
        return lambda labels, rng: mmd_from_kernel(K, labels)

    if kind.tag == "acc":
        return lambda labels, rng: statistic_acc(
            kind.classifier, data.with_labels(labels), kind.acc_folds, rng
        )

    fit = kind.fitter()
    X = data.features

    def cpt(labels, rng):
        relabelled = data.with_labels(labels)
        probs = fit(relabelled, X)
        if kind.tag == "cpt1":
            ones = relabelled.labels == 1
            return statistic_w1(probs.values[ones], relabelled.n, relabelled.m)
        return statistic_w2(probs)

    return cpt


def permutation_test(
    data: LabeledDataset,
    kind: StatisticKind,
    B: int = 200,
    alpha: float = 0.05,
    rng: RngStream = RngStream(0),
    threads: int = 1,
) -> TestResult:
    """Permutation test of exchangeable labels.

    The observed statistic is computed on the true labels; each of the ``B``
    null values comes from a uniformly random relabelling with the same
    ``n`` ones, and the classifier (if any) is refitted every time.
    Relabelling ``j`` draws from ``rng.spawn(j)``, so the result does not
    depend on ``threads``.
    """
    if B < 1:
        raise InputError("B must be at least 1")
    if not 0 < alpha < 1:
        raise InputError("alpha must lie in (0, 1)")
    stat = statistic_function(kind, data)
    labels = data.labels
    observed = stat(labels, rng.spawn(0, 1))

    def replicate(j):
        stream = rng.spawn(j)
        perm = labels[stream.generator().permutation(labels.size)]
        return stat(perm, stream.spawn(1))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            null = list(pool.map(replicate, range(1, B + 1)))
    else:
        null = [replicate(j) for j in range(1, B + 1)]
    null = np.sort(np.asarray(null, dtype=np.float64))
    null.setflags(write=False)
    return TestResult(
        statistic_kind=kind,
        observed=float(observed),
        null_sample=null,
        p_value=permutation_p_value(observed, null),
        critical_value=critical_value(null, alpha),
        alpha=alpha,
        num_permutations=B,
        seed=rng.seed,
    )


def p_value_ecdf(p_values, grid) -> np.ndarray:
    """Fraction of p-values at or below each level in ``grid``."""
    p = np.asarray(p_values, dtype=np.float64)
    if p.size == 0:
        raise EmptyInput("no p-values")
    if np.any((p <= 0) | (p > 1)):
        raise InputError("p-values must lie in (0, 1]")
    g = np.asarray(grid, dtype=np.float64)
    return np.searchsorted(np.sort(p), g, side="right") / p.size
