"""Synthetic two-sample scenarios and document-term matrices."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import asdict, dataclass, replace

import numpy as np

from .core import (
    LabeledDataset,
    RngStream,
    cholesky,
    sample_mvn,
    sample_precision_mvn,
)
from .errors import EmptyVocabulary, InputError, SingleClassTrainingSet

SCENARIOS = ("mean_shift", "cov_diff", "ggm", "marginal_diff")


def mean_shift_vector(d: int, shift: float, pattern: str = "sparse") -> np.ndarray:
    """Shift of Euclidean norm ``shift``: all in coordinate 1 (sparse) or
    spread evenly over all coordinates (dense)."""
    if pattern == "sparse":
        delta = np.zeros(d)
        delta[0] = shift
        return delta
    if pattern == "dense":
        return np.full(d, shift / np.sqrt(d))
    raise InputError(f"unknown shift pattern {pattern!r}; valid: sparse, dense")


def gen_mean_shift(d, n, sigma, delta, rng: RngStream, m=None):
    """``n`` rows of N(0, sigma^2 I) and ``m`` (default ``n``) rows of N(delta, sigma^2 I)."""
    if not sigma > 0:
        raise InputError("sigma must be positive")
    delta = np.asarray(delta, dtype=np.float64).ravel()
    if delta.shape[0] != d:
        raise InputError(f"delta has length {delta.shape[0]}, expected {d}")
    m = n if m is None else m
    chol = cholesky(sigma**2 * np.eye(d))
    x1 = sample_mvn(np.zeros(d), chol, n, rng.spawn(1))
    x2 = sample_mvn(delta, chol, m, rng.spawn(2))
    return x1, x2


def equicorrelated_covariance(diag, rho) -> np.ndarray:
    diag = np.asarray(diag, dtype=np.float64)
    S = np.full((diag.size, diag.size), float(rho))
    np.fill_diagonal(S, diag)
    return S


def default_cov_diagonal(d: int) -> np.ndarray:
    """1.0, 1.1, 1.2, ... (length ``d``)."""
    return np.round(1.0 + 0.1 * np.arange(d), 10)


def gen_cov_diff(d, n, diag, rho1, rho2, rng: RngStream, m=None):
    """Zero-mean Gaussians sharing ``diag`` with constant off-diagonals rho1, rho2."""
    diag = np.asarray(diag, dtype=np.float64)
    if diag.shape != (d,):
        raise InputError(f"diag has shape {diag.shape}, expected ({d},)")
    m = n if m is None else m
    L1 = cholesky(equicorrelated_covariance(diag, rho1))
    L2 = cholesky(equicorrelated_covariance(diag, rho2))
    return (
        sample_mvn(np.zeros(d), L1, n, rng.spawn(1)),
        sample_mvn(np.zeros(d), L2, m, rng.spawn(2)),
    )


def ggm_precisions(d, tau, delta1, delta2, rng: RngStream):
    """Precision matrices of two graphs: a dense U(0,1)-weighted graph and a
    copy with each edge removed independently with probability ``tau``.

    Returns ``(Q1, Q2, A1, A2)``; each ``Q = D - A + delta I`` with ``D`` the
    weighted degree matrix.
    """
    if d < 2:
        raise InputError("ggm needs d >= 2")
    if not 0 <= tau < 1:
        raise InputError("tau must lie in [0, 1)")
    if not (delta1 > 0 and delta2 > 0):
        raise InputError("delta1 and delta2 must be positive")
    gen = rng.generator()
    iu = np.triu_indices(d, k=1)
    weights = gen.uniform(0.0, 1.0, size=iu[0].size)
    keep = gen.uniform(0.0, 1.0, size=iu[0].size) >= tau
    A1 = np.zeros((d, d))
    A1[iu] = weights
    A1 = A1 + A1.T
    A2 = np.zeros((d, d))
    A2[iu] = weights * keep
    A2 = A2 + A2.T
    Q1 = np.diag(A1.sum(axis=1)) - A1 + delta1 * np.eye(d)
    Q2 = np.diag(A2.sum(axis=1)) - A2 + delta2 * np.eye(d)
    return Q1, Q2, A1, A2


def gen_ggm_pair(d, tau, delta1, delta2, n, rng: RngStream, m=None, graph_rng: RngStream | None = None):
    """Samples from N(0, Q1^-1) and N(0, Q2^-1).

    The graphs come from ``graph_rng`` when given (so they can be held fixed
    across replications) and from ``rng`` otherwise.
    """
    m = n if m is None else m
    Q1, Q2, _, _ = ggm_precisions(d, tau, delta1, delta2, graph_rng or rng.spawn(0))
    return (
        sample_precision_mvn(cholesky(Q1), n, rng.spawn(1)),
        sample_precision_mvn(cholesky(Q2), m, rng.spawn(2)),
    )


def gen_marginal_diff(d, n, rng: RngStream, m=None):
    """Exp(1) x N(1, 1)^(d-1) against N(1, 1)^d: equal means and covariances."""
    if d < 2:
        raise InputError("marginal_diff needs d >= 2")
    m = n if m is None else m
    g1 = rng.spawn(1).generator()
    x1 = 1.0 + g1.standard_normal((n, d))
    x1[:, 0] = g1.exponential(1.0, size=n)
    x2 = 1.0 + rng.spawn(2).generator().standard_normal((m, d))
    return x1, x2


@dataclass(frozen=True)
class ScenarioSpec:
    """A synthetic scenario; only the fields relevant to ``kind`` are used."""

    kind: str = "mean_shift"
    d: int = 100
    n: int = 100
    m: int | None = None
    seed: int = 0
    sigma: float = 2.0
    shift: float = 1.6
    shift_pattern: str = "sparse"
    diag: tuple[float, ...] | None = None
    rho1: float = 0.01
    rho2: float = 0.21
    tau: float = 0.65
    delta1: float = 0.1
    delta2: float = 0.1

    def __post_init__(self):
        if self.kind not in SCENARIOS:
            raise InputError(f"unknown scenario {self.kind!r}; valid: {', '.join(SCENARIOS)}")
        if self.d < 1 or self.n < 2 or (self.m is not None and self.m < 2):
            raise InputError("d must be positive and n, m at least 2")
        if self.kind in ("ggm", "marginal_diff") and self.d < 2:
            raise InputError(f"{self.kind} needs d >= 2")
        if self.diag is not None and len(self.diag) != self.d:
            raise InputError(f"diag has {len(self.diag)} entries, expected d={self.d}")

    @property
    def sizes(self) -> tuple[int, int]:
        return self.n, self.n if self.m is None else self.m

    def with_size(self, n: int) -> "ScenarioSpec":
        return replace(self, n=n, m=None)

    def is_null(self) -> bool:
        if self.kind == "mean_shift":
            return self.shift == 0
        if self.kind == "cov_diff":
            return self.rho1 == self.rho2
        if self.kind == "ggm":
            return self.tau == 0 and self.delta1 == self.delta2
        return False

    def parameters(self) -> dict:
        """Parameters that matter for ``kind`` (for manifests and reports)."""
        keys = {
            "mean_shift": ("sigma", "shift", "shift_pattern"),
            "cov_diff": ("diag", "rho1", "rho2"),
            "ggm": ("tau", "delta1", "delta2"),
            "marginal_diff": (),
        }[self.kind]
        all_fields = asdict(self)
        out = {k: all_fields[k] for k in ("kind", "d", "n", "m", "seed")}
        out.update({k: all_fields[k] for k in keys})
        if self.kind == "cov_diff" and self.diag is None:
            out["diag"] = "1.0 + 0.1 * i"
        return out

    def graph_stream(self) -> RngStream:
        return RngStream(self.seed).spawn(0x6A09E667)


def generate(scenario: ScenarioSpec, rng: RngStream):
    """Draw ``(sample1, sample2)`` for ``scenario`` from ``rng``.

    GGM graphs are drawn once per scenario seed, not per call.
    """
    s = scenario
    n, m = s.sizes
    if s.kind == "mean_shift":
        return gen_mean_shift(s.d, n, s.sigma, mean_shift_vector(s.d, s.shift, s.shift_pattern), rng, m)
    if s.kind == "cov_diff":
        diag = default_cov_diagonal(s.d) if s.diag is None else np.asarray(s.diag)
        return gen_cov_diff(s.d, n, diag, s.rho1, s.rho2, rng, m)
    if s.kind == "ggm":
        return gen_ggm_pair(s.d, s.tau, s.delta1, s.delta2, n, rng, m, graph_rng=s.graph_stream())
    return gen_marginal_diff(s.d, n, rng, m)


def generate_dataset(scenario: ScenarioSpec, rng: RngStream) -> LabeledDataset:
    x1, x2 = generate(scenario, rng)
    return LabeledDataset.from_samples(x1, x2)


_TOKEN = re.compile(r"[\W_]+")


def tokenize(text: str) -> list[str]:
    """Lowercase, split on runs of non-alphanumeric characters."""
    return [t for t in _TOKEN.split(text.lower()) if t]


def build_doc_term_matrix(corpus, min_df: float = 0.05, remove_terms=()):
    """Binary term-presence matrix for a labelled corpus.

    ``corpus`` is a sequence of ``(label, text)`` pairs with labels 0/1. A
    term is kept when it occurs in at least a ``min_df`` fraction of all
    documents and is not in ``remove_terms``. Columns are sorted terms.
    Returns a ``LabeledDataset`` whose ``feature_names`` is the vocabulary.
    """
    if not 0 < min_df <= 1:
        raise InputError("min_df must lie in (0, 1]")
    docs = list(corpus)
    if not docs:
        raise InputError("empty corpus")
    labels = np.array([int(label) for label, _ in docs])
    if not np.all((labels == 0) | (labels == 1)):
        raise InputError("corpus labels must be 0 or 1")
    if labels.min() == labels.max():
        raise SingleClassTrainingSet("corpus contains a single class")
    term_sets = [set(tokenize(text)) for _, text in docs]
    df = Counter(t for terms in term_sets for t in terms)
    removed = {t.lower() for t in remove_terms}
    D = len(docs)
    vocab = sorted(t for t, c in df.items() if c / D >= min_df - 1e-12 and t not in removed)
    if not vocab:
        raise EmptyVocabulary(f"no term reaches document frequency {min_df}")
    col = {t: j for j, t in enumerate(vocab)}
    X = np.zeros((D, len(vocab)))
    for i, terms in enumerate(term_sets):
        for t in terms:
            j = col.get(t)
            if j is not None:
                X[i, j] = 1.0
    return LabeledDataset(X, labels, tuple(vocab))
