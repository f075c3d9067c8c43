"""Probability random forest: Gini CART trees on class-stratified bootstraps.

The tree builder is a numba kernel. Randomness inside it comes from a
splitmix64 counter stream keyed by ``(seed, tree index)``, so a fit depends
only on the classifier settings and on the data in canonical (row id) order.
"""

from __future__ import annotations

import math

import numba
import numpy as np

from ..core import LabeledDataset
from ..errors import InputError
from .base import ClassifierSpec, ProbEstimate, check_eval, clip_probabilities

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0
_MASK64 = (1 << 64) - 1


@numba.njit(cache=True, nogil=True)
def _mix(z):
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    return z ^ (z >> _S31)


@numba.njit(cache=True, nogil=True)
def _next(state):
    state[0] += _GOLDEN
    return _mix(state[0])


@numba.njit(cache=True, nogil=True)
def _below(state, n):
    return int(((_next(state) >> _S11) * _INV53) * n)


@numba.njit(cache=True, nogil=True)
def _best_split(X, y, w, S, start, end, feats, mtry, state):
    """Scan ``mtry`` randomly chosen features for the lowest weighted Gini.

    ``S[f, start:end]`` lists the node's rows sorted by feature ``f``.
    Returns ``(feature, threshold)``; feature is -1 when no candidate lowers
    the node impurity.
    """
    d = feats.shape[0]
    for j in range(mtry):
        r = j + _below(state, d - j)
        tmp = feats[j]
        feats[j] = feats[r]
        feats[r] = tmp

    W = 0.0
    C = 0.0
    for i in range(start, end):
        r = S[0, i]
        W += w[r]
        C += w[r] * y[r]
    best_score = 2.0 * C * (W - C) / W
    best_feat = -1
    best_thr = 0.0
    for j in range(mtry):
        f = feats[j]
        wl = 0.0
        cl = 0.0
        for i in range(start, end - 1):
            r = S[f, i]
            wl += w[r]
            cl += w[r] * y[r]
            a = X[r, f]
            b = X[S[f, i + 1], f]
            if a == b:
                continue
            wr = W - wl
            cr = C - cl
            score = 2.0 * cl * (wl - cl) / wl + 2.0 * cr * (wr - cr) / wr
            if score < best_score:
                best_score = score
                best_feat = f
                thr = a + (b - a) * 0.5
                if thr >= b:
                    thr = a
                best_thr = thr
    return best_feat, best_thr


@numba.njit(cache=True, nogil=True)
def _forest_kernel(X, y, Xeval, n_trees, mtry, min_leaf, seed, oob):
    N, d = X.shape
    E = Xeval.shape[0]
    total = np.zeros(E)
    used = np.zeros(E)

    n1 = 0
    for i in range(N):
        n1 += y[i]
    idx1 = np.empty(n1, np.int64)
    idx0 = np.empty(N - n1, np.int64)
    a = 0
    b = 0
    for i in range(N):
        if y[i] == 1:
            idx1[a] = i
            a += 1
        else:
            idx0[b] = i
            b += 1

    presorted = np.empty((d, N), np.int64)
    for f in range(d):
        presorted[f] = np.argsort(X[:, f], kind="mergesort")

    w = np.zeros(N)
    S = np.empty((d, N), np.int64)
    buf = np.empty(N, np.int64)
    goes_left = np.zeros(N, np.bool_)
    feats = np.arange(d)
    max_nodes = 2 * N + 1
    node_feat = np.empty(max_nodes, np.int64)
    node_thr = np.empty(max_nodes)
    node_left = np.empty(max_nodes, np.int64)
    node_right = np.empty(max_nodes, np.int64)
    node_val = np.empty(max_nodes)
    st_node = np.empty(max_nodes, np.int64)
    st_start = np.empty(max_nodes, np.int64)
    st_end = np.empty(max_nodes, np.int64)
    state = np.empty(1, np.uint64)

    for t in range(n_trees):
        state[0] = _mix(np.uint64(seed) ^ _mix(np.uint64(t) + _GOLDEN))
        w[:] = 0.0
        for _ in range(n1):
            w[idx1[_below(state, n1)]] += 1.0
        for _ in range(N - n1):
            w[idx0[_below(state, N - n1)]] += 1.0
        nr = 0
        for f in range(d):
            k = 0
            for i in range(N):
                r = presorted[f, i]
                if w[r] > 0.0:
                    S[f, k] = r
                    k += 1
            nr = k

        n_nodes = 1
        top = 0
        st_node[0] = 0
        st_start[0] = 0
        st_end[0] = nr
        while top >= 0:
            node = st_node[top]
            s = st_start[top]
            e = st_end[top]
            top -= 1
            W = 0.0
            C = 0.0
            for i in range(s, e):
                r = S[0, i]
                W += w[r]
                C += w[r] * y[r]
            node_val[node] = C / W
            node_feat[node] = -1
            if W <= min_leaf or C == 0.0 or C == W:
                continue
            bf, thr = _best_split(X, y, w, S, s, e, feats, mtry, state)
            if bf < 0:
                continue
            for i in range(s, e):
                r = S[0, i]
                goes_left[r] = X[r, bf] <= thr
            mid = s
            for f in range(d):
                lo = s
                hi = 0
                for i in range(s, e):
                    r = S[f, i]
                    if goes_left[r]:
                        S[f, lo] = r
                        lo += 1
                    else:
                        buf[hi] = r
                        hi += 1
                for i in range(hi):
                    S[f, lo + i] = buf[i]
                mid = lo
            node_feat[node] = bf
            node_thr[node] = thr
            node_left[node] = n_nodes
            node_right[node] = n_nodes + 1
            top += 1
            st_node[top] = n_nodes + 1
            st_start[top] = mid
            st_end[top] = e
            top += 1
            st_node[top] = n_nodes
            st_start[top] = s
            st_end[top] = mid
            n_nodes += 2

        for i in range(E):
            if oob and w[i] > 0.0:
                continue
            node = 0
            while node_feat[node] >= 0:
                if Xeval[i, node_feat[node]] <= node_thr[node]:
                    node = node_left[node]
                else:
                    node = node_right[node]
            total[i] += node_val[node]
            used[i] += 1.0

    out = np.empty(E)
    for i in range(E):
        out[i] = total[i] / used[i] if used[i] > 0 else np.nan
    return out


def resolve_mtry(spec: ClassifierSpec, d: int) -> int:
    mtry = spec.forest_mtry if spec.forest_mtry is not None else max(1, math.isqrt(d))
    if mtry > d:
        raise InputError(f"forest_mtry={mtry} exceeds the number of features {d}")
    return mtry


def _canonical(train: LabeledDataset, row_ids):
    if row_ids is None:
        return train.features, train.labels
    row_ids = np.asarray(row_ids)
    if row_ids.shape != (train.N,) or np.unique(row_ids).size != train.N:
        raise InputError("row_ids must be unique, one per training row")
    order = np.argsort(row_ids, kind="stable")
    return train.features[order], train.labels[order]


def forest_fit_predict(spec: ClassifierSpec, train: LabeledDataset, eval_x, row_ids=None) -> ProbEstimate:
    """Average leaf label-1 frequency over ``spec.forest_trees`` trees.

    ``row_ids`` give each training row a stable identity (default: its
    position); trees depend on rows only through that identity, so shuffling
    rows together with their ids leaves the estimate unchanged.
    """
    x = check_eval(train, eval_x)
    X, y = _canonical(train, row_ids)
    p = _forest_kernel(
        np.ascontiguousarray(X), np.ascontiguousarray(y), np.ascontiguousarray(x),
        spec.forest_trees, resolve_mtry(spec, train.d), float(spec.forest_min_leaf),
        np.uint64(spec.seed & _MASK64), False,
    )
    return clip_probabilities(p, train.N)


def forest_oob_proba(spec: ClassifierSpec, train: LabeledDataset) -> np.ndarray:
    """Out-of-bag label-1 probability per training row, unclipped.

    NaN marks a row that was in-bag for every tree.
    """
    X = np.ascontiguousarray(train.features)
    return _forest_kernel(
        X, np.ascontiguousarray(train.labels), X,
        spec.forest_trees, resolve_mtry(spec, train.d), float(spec.forest_min_leaf),
        np.uint64(spec.seed & _MASK64), True,
    )
