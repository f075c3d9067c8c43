import numpy as np
from scipy.spatial.distance import cdist

from ..core import LabeledDataset
from ..errors import KTooLarge
from .base import ProbEstimate, check_eval, clip_probabilities

_CHUNK = 2048


def knn_proba(k: int, train: LabeledDataset, eval_x) -> ProbEstimate:
    """Fraction of label-1 rows among the ``k`` nearest training rows.

    Euclidean distance; equal distances resolve to the lower training row
    index. An evaluation point that coincides with a training row counts
    that row as its own neighbour.
    """
    x = check_eval(train, eval_x)
    if not 1 <= k <= train.N - 1:
        raise KTooLarge(f"k={k} outside [1, N-1] with N={train.N}")
    y = train.labels.astype(np.float64)
    out = np.empty(x.shape[0])
    for start in range(0, x.shape[0], _CHUNK):
        block = x[start:start + _CHUNK]
        dist = cdist(block, train.features, "sqeuclidean")
        nearest = np.argsort(dist, axis=1, kind="stable")[:, :k]
        out[start:start + _CHUNK] = y[nearest].sum(axis=1) / k
    return clip_probabilities(out, train.N)
