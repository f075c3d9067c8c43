"""Two-sample tests from estimated classification probabilities.

A classifier trained to tell the two samples apart yields estimates of
``p(x) = P(Y=1 | x)``; the mean log-odds over the first sample (``cpt1``) or
the variance of the estimates (``cpt2``) is then calibrated by permuting the
labels. Accuracy and kernel-MMD permutation tests are included as baselines.
"""

from .classifiers import ClassifierSpec, ProbEstimate, fit_predict_proba
from .core import LabeledDataset, RngStream
from .generators import ScenarioSpec, generate, generate_dataset
from .permutation import TestResult, p_value_ecdf, permutation_test
from .stats import StatisticKind

__all__ = [
    "ClassifierSpec",
    "LabeledDataset",
    "ProbEstimate",
    "RngStream",
    "ScenarioSpec",
    "StatisticKind",
    "TestResult",
    "fit_predict_proba",
    "generate",
    "generate_dataset",
    "p_value_ecdf",
    "permutation_test",
]
