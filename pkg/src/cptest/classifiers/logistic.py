"""L2-penalised logistic regression fitted by full-batch gradient descent."""

from __future__ import annotations

import numpy as np
from scipy.special import expit

from ..core import LabeledDataset
from .base import ClassifierSpec, ProbEstimate, check_eval, clip_probabilities

_ARMIJO = 1e-4
_MAX_BACKTRACK = 60


def penalized_loss(theta, X, y, l2):
    """Mean negative log-likelihood plus ``l2 / (2N) * |w|^2`` and its gradient.

    ``theta`` packs the weights followed by the (unpenalised) intercept.
    """
    N = X.shape[0]
    w, b = theta[:-1], theta[-1]
    z = X @ w + b
    loss = (np.sum(np.logaddexp(0.0, z)) - y @ z + 0.5 * l2 * (w @ w)) / N
    r = expit(z) - y
    grad = np.empty_like(theta)
    grad[:-1] = (X.T @ r + l2 * w) / N
    grad[-1] = r.sum() / N
    return loss, grad


def fit_logistic(X, y, l2=1.0, max_iter=1000, tol=1e-6):
    """Minimise ``penalized_loss`` from ``w = 0, b = logit(mean(y))``.

    Steps follow the Barzilai-Borwein length, halved until the Armijo
    condition holds, so every accepted step lowers the objective.

    Returns ``(theta, converged, trace)`` where ``trace`` lists the objective
    after each accepted step (starting value first).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    ybar = min(max(y.mean(), 1e-12), 1 - 1e-12)
    theta = np.zeros(X.shape[1] + 1)
    theta[-1] = np.log(ybar / (1 - ybar))
    loss, grad = penalized_loss(theta, X, y, l2)
    trace = [loss]
    # initial step 1/L; the Frobenius norm of [X, 1] bounds its spectral norm in L
    col_scale = np.sum(X * X) + X.shape[0]
    step = X.shape[0] / (0.25 * col_scale + l2)
    prev_theta = prev_grad = None
    for _ in range(max_iter):
        gnorm2 = grad @ grad
        if np.sqrt(gnorm2) <= tol:
            return theta, True, trace
        if prev_theta is not None:
            s = theta - prev_theta
            r = grad - prev_grad
            sr = s @ r
            if sr > 0:
                step = (s @ s) / sr
        for _ in range(_MAX_BACKTRACK):
            cand = theta - step * grad
            cand_loss, cand_grad = penalized_loss(cand, X, y, l2)
            if cand_loss <= loss - _ARMIJO * step * gnorm2:
                break
            step *= 0.5
        else:
            return theta, False, trace
        prev_theta, prev_grad = theta, grad
        theta, loss, grad = cand, cand_loss, cand_grad
        trace.append(loss)
    converged = bool(np.sqrt(grad @ grad) <= tol)
    return theta, converged, trace


def logistic_fit_predict(spec: ClassifierSpec, train: LabeledDataset, eval_x) -> ProbEstimate:
    x = check_eval(train, eval_x)
    # canonical row order: the fit is then independent of how rows were supplied
    X, y = train.features, train.labels
    order = np.lexsort(np.column_stack([y, X]).T[::-1])
    theta, converged, _ = fit_logistic(
        X[order], y[order], spec.logistic_l2, spec.logistic_max_iter, spec.logistic_tol
    )
    p = expit(x @ theta[:-1] + theta[-1])
    return clip_probabilities(p, train.N, converged=converged)
