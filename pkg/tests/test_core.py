import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cptest.core import (
    CholeskyFactor,
    LabeledDataset,
    RngStream,
    cholesky,
    sample_mvn,
    sample_precision_mvn,
)
from cptest.errors import (
    DimensionMismatch,
    InputError,
    NotPositiveDefinite,
    SingleClassTrainingSet,
    SingularFactor,
)


def test_cholesky_identity():
    assert np.array_equal(cholesky(np.eye(3)).lower, np.eye(3))


def test_cholesky_hand_example():
    L = cholesky([[4.0, 2.0], [2.0, 3.0]]).lower
    np.testing.assert_allclose(L, [[2.0, 0.0], [1.0, np.sqrt(2.0)]], rtol=1e-14)
    np.testing.assert_allclose(L @ L.T, [[4.0, 2.0], [2.0, 3.0]], rtol=1e-14)


def test_cholesky_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        cholesky([[1.0, 2.0], [2.0, 1.0]])


def test_cholesky_rejects_asymmetric():
    with pytest.raises(NotPositiveDefinite):
        cholesky([[2.0, 1.0], [0.0, 2.0]])


def test_cholesky_rejects_non_square():
    with pytest.raises(DimensionMismatch):
        cholesky(np.ones((2, 3)))


@settings(max_examples=40, deadline=None)
@given(d=st.integers(1, 30), seed=st.integers(0, 2**32 - 1))
def test_cholesky_reconstructs_random_spd(d, seed):
    gen = np.random.default_rng(seed)
    A = gen.uniform(-1, 1, (d, d))
    S = (A + A.T) / 2
    S += np.diag(np.abs(S).sum(axis=1) + 0.1)
    L = cholesky(S).lower
    assert np.all(np.diag(L) > 0)
    assert np.linalg.norm(L @ L.T - S) / np.linalg.norm(S) < 1e-10


def test_rng_stream_reproducible():
    a = RngStream(7, 3).generator().standard_normal(5)
    b = RngStream(7, 3).generator().standard_normal(5)
    c = RngStream(7, 4).generator().standard_normal(5)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_rng_spawn_is_pure_and_distinct():
    root = RngStream(11)
    assert root.spawn(1, 2) == root.spawn(1).spawn(2)
    ids = {root.spawn(i).stream_id for i in range(1000)}
    assert len(ids) == 1000


def test_distinct_streams_uncorrelated():
    a = RngStream(5, 1).generator().standard_normal(20000)
    b = RngStream(5, 2).generator().standard_normal(20000)
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / np.sqrt(20000)


def test_sample_mvn_mean_envelope():
    d, count = 5, 20000
    x = sample_mvn(np.zeros(d), cholesky(np.eye(d)), count, RngStream(1))
    assert x.shape == (count, d)
    assert np.all(np.abs(x.mean(axis=0)) < 4 * np.sqrt(d) / np.sqrt(count))


def test_sample_mvn_deterministic():
    L = cholesky([[4.0, 2.0], [2.0, 3.0]])
    a = sample_mvn([1.0, -1.0], L, 50, RngStream(3, 9))
    b = sample_mvn([1.0, -1.0], L, 50, RngStream(3, 9))
    assert np.array_equal(a, b)


def test_sample_mvn_covariance():
    S = np.array([[4.0, 2.0], [2.0, 3.0]])
    x = sample_mvn(np.zeros(2), cholesky(S), 100_000, RngStream(2))
    assert np.all(np.abs(np.cov(x.T) - S) < 0.1)


def test_sample_mvn_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        sample_mvn(np.zeros(3), cholesky(np.eye(2)), 4, RngStream(0))


def test_precision_identity_matches_covariance_sampler():
    a = sample_precision_mvn(cholesky(np.eye(4)), 100, RngStream(8))
    b = sample_mvn(np.zeros(4), cholesky(np.eye(4)), 100, RngStream(8))
    np.testing.assert_array_equal(a, b)


def test_precision_diagonal_variance():
    x = sample_precision_mvn(cholesky(np.diag([4.0, 4.0])), 50_000, RngStream(4))
    assert np.all(np.abs(x.var(axis=0) - 0.25) < 0.02)


def test_precision_two_by_two_covariance():
    Q = np.array([[2.0, 1.0], [1.0, 2.0]])
    x = sample_precision_mvn(cholesky(Q), 100_000, RngStream(5))
    expected = np.array([[2.0, -1.0], [-1.0, 2.0]]) / 3.0
    assert np.all(np.abs(np.cov(x.T) - expected) < 0.02)


def test_precision_singular_factor():
    with pytest.raises(SingularFactor):
        sample_precision_mvn(CholeskyFactor(np.diag([1.0, 1e-13])), 3, RngStream(0))


def test_two_samplers_agree_in_moments():
    Q = np.array([[3.0, 1.0, 0.5], [1.0, 2.0, 0.3], [0.5, 0.3, 1.5]])
    S = np.linalg.inv(Q)
    count = 40_000
    a = sample_precision_mvn(cholesky(Q), count, RngStream(6, 1))
    b = sample_mvn(np.zeros(3), cholesky(S), count, RngStream(6, 2))
    scale = np.sqrt(np.outer(np.diag(S), np.diag(S)))
    tol = 3 * count ** -0.5
    # differences of two independent estimates: sd <= sqrt(2) * (entry sd)
    assert np.all(np.abs(a.mean(0) - b.mean(0)) < tol * np.sqrt(2 * np.diag(S)))
    assert np.all(np.abs(np.cov(a.T) - np.cov(b.T)) < tol * 2 * scale)


def test_labeled_dataset_counts():
    ds = LabeledDataset.from_samples(np.zeros((3, 2)), np.ones((5, 2)))
    assert (ds.n, ds.m, ds.N, ds.d) == (3, 5, 8, 2)
    assert ds.pi_hat == 3 / 8
    assert list(ds.labels) == [1, 1, 1, 0, 0, 0, 0, 0]


def test_labeled_dataset_rejects_single_class():
    with pytest.raises(SingleClassTrainingSet):
        LabeledDataset(np.zeros((4, 1)), [1, 1, 1, 0])


@pytest.mark.parametrize("bad", [np.nan, np.inf])
def test_labeled_dataset_rejects_nonfinite(bad):
    x = np.zeros((4, 1))
    x[2, 0] = bad
    with pytest.raises(InputError):
        LabeledDataset(x, [1, 1, 0, 0])


def test_labeled_dataset_width_mismatch():
    with pytest.raises(DimensionMismatch):
        LabeledDataset.from_samples(np.zeros((3, 2)), np.zeros((3, 3)))
