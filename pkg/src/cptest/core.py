"""Numeric foundations: validated sample containers, Cholesky factors,
Gaussian samplers and the seeded random-stream discipline."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .errors import (
    DimensionMismatch,
    InputError,
    NotPositiveDefinite,
    SingleClassTrainingSet,
    SingularFactor,
)

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by ``(seed, stream_id)``.

    Draws come from a Philox counter-based generator whose 128-bit key is
    the pair itself, so streams with different ids never overlap and a
    stream can be recreated anywhere (any thread, any order).
    """

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        key = ((self.stream_id & _MASK64) << 64) | (self.seed & _MASK64)
        return np.random.Generator(np.random.Philox(key=key))

    def spawn(self, *keys: int) -> "RngStream":
        """Child stream; the id is a hash of this id and ``keys``."""
        sid = self.stream_id & _MASK64
        for k in keys:
            sid = _splitmix64(sid ^ _splitmix64(int(k) & _MASK64))
        return RngStream(self.seed, sid)

    def integer_seed(self) -> int:
        """A 63-bit seed derived from the stream, for seeding sub-algorithms."""
        return int(self.generator().integers(0, 2**63 - 1))


def as_sample_matrix(x, name: str = "sample") -> np.ndarray:
    """Validate and return ``x`` as a 2-D float64 array of finite values.

    A 1-D input is read as a single feature column.
    """
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InputError(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InputError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains NaN or infinite entries")
    return arr


@dataclass(frozen=True)
class LabeledDataset:
    """Pooled two-sample data: rows with 0/1 labels (1 = first sample)."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        x = as_sample_matrix(self.features, "features")
        y = np.asarray(self.labels)
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise DimensionMismatch(
                f"labels length {y.shape} does not match {x.shape[0]} feature rows"
            )
        if not np.all((y == 0) | (y == 1)):
            raise InputError("labels must be 0 or 1")
        y = y.astype(np.int64)
        n = int(y.sum())
        if n < 2 or x.shape[0] - n < 2:
            raise SingleClassTrainingSet(
                f"need at least 2 rows per class, got n={n}, m={x.shape[0] - n}"
            )
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "labels", y)

    @classmethod
    def from_samples(cls, sample1, sample0, feature_names=None) -> "LabeledDataset":
        x1 = as_sample_matrix(sample1, "sample1")
        x0 = as_sample_matrix(sample0, "sample0")
        if x1.shape[1] != x0.shape[1]:
            raise DimensionMismatch(
                f"samples have different widths: {x1.shape[1]} vs {x0.shape[1]}"
            )
        y = np.concatenate([np.ones(len(x1), np.int64), np.zeros(len(x0), np.int64)])
        return cls(np.vstack([x1, x0]), y, feature_names)

    def with_labels(self, labels) -> "LabeledDataset":
        return LabeledDataset(self.features, labels, self.feature_names)

    def subset(self, rows) -> "LabeledDataset":
        return LabeledDataset(self.features[rows], self.labels[rows], self.feature_names)

    @property
    def n(self) -> int:
        return int(self.labels.sum())

    @property
    def m(self) -> int:
        return self.N - self.n

    @property
    def N(self) -> int:
        return self.labels.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]

    @property
    def pi_hat(self) -> float:
        return self.n / self.N

    def class_rows(self, label: int) -> np.ndarray:
        return self.features[self.labels == label]


@dataclass(frozen=True)
class CholeskyFactor:
    lower: np.ndarray

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


def cholesky(S) -> CholeskyFactor:
    """Lower Cholesky factor ``L`` with ``L @ L.T == S``.

    Raises ``NotPositiveDefinite`` when ``S`` is not symmetric (within 1e-12,
    scaled by its largest entry) or has a non-positive pivot.
    """
    S = np.asarray(S, dtype=np.float64)
    if S.ndim != 2 or S.shape[0] != S.shape[1] or S.shape[0] < 1:
        raise DimensionMismatch(f"expected a square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise InputError("matrix contains NaN or infinite entries")
    scale = max(1.0, float(np.max(np.abs(S))))
    if np.max(np.abs(S - S.T)) > 1e-12 * scale:
        raise NotPositiveDefinite("matrix is not symmetric")
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc
    if not np.all(np.diag(L) > 0):
        raise NotPositiveDefinite("matrix has a non-positive pivot")
    L.setflags(write=False)
    return CholeskyFactor(L)


def sample_mvn(mean, chol: CholeskyFactor, count: int, rng: RngStream) -> np.ndarray:
    """``count`` rows of ``mean + L z`` with ``z`` standard normal."""
    mean = np.asarray(mean, dtype=np.float64).ravel()
    if mean.shape[0] != chol.dim:
        raise DimensionMismatch(
            f"mean has length {mean.shape[0]}, factor has dimension {chol.dim}"
        )
    if count < 1:
        raise InputError("count must be positive")
    z = rng.generator().standard_normal((count, chol.dim))
    return mean + z @ chol.lower.T


def sample_precision_mvn(precision_chol: CholeskyFactor, count: int, rng: RngStream) -> np.ndarray:
    """``count`` rows from N(0, Q^-1) given the Cholesky factor of ``Q``.

    Solves ``L.T x = z`` per row; the inverse is never formed.
    """
    L = precision_chol.lower
    if np.min(np.diag(L)) < 1e-12:
        raise SingularFactor("precision factor has a diagonal entry below 1e-12")
    if count < 1:
        raise InputError("count must be positive")
    z = rng.generator().standard_normal((count, precision_chol.dim))
    return solve_triangular(L.T, z.T, lower=False).T
