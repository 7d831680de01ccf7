"""Regression random forest built on a jit-compiled CART kernel.

Split rule: variance reduction (equivalently, sum-of-squared-error drop),
every feature considered at every split, thresholds at midpoints of
consecutive distinct sorted values, ties broken by lowest feature index and
then lowest threshold, nodes split while they hold at least 2 samples, no
depth limit. Leaves predict the mean target. Each tree trains on a
bootstrap resample of size n drawn from its own seed stream.
"""

from __future__ import annotations

import dataclasses

import numpy as np
from numba import njit

from .. import rng


@njit(cache=True)
def _grow_tree(X, y, min_samples_split):
    # Flat-array tree: feature[k] < 0 marks a leaf. Children are allocated
    # in creation order; max node count for n samples is 2n - 1.
    n, d = X.shape
    max_nodes = 2 * n + 1
    feature = np.full(max_nodes, -1, np.int64)
    threshold = np.zeros(max_nodes, np.float64)
    left = np.full(max_nodes, -1, np.int64)
    right = np.full(max_nodes, -1, np.int64)
    value = np.zeros(max_nodes, np.float64)

    idx = np.arange(n)
    buf = np.empty(n, np.int64)
    stack_node = np.empty(max_nodes, np.int64)
    stack_lo = np.empty(max_nodes, np.int64)
    stack_hi = np.empty(max_nodes, np.int64)
    stack_node[0] = 0
    stack_lo[0] = 0
    stack_hi[0] = n
    top = 1
    n_nodes = 1

    while top > 0:
        top -= 1
        node = stack_node[top]
        lo = stack_lo[top]
        hi = stack_hi[top]
        m = hi - lo

        s = 0.0
        for i in range(lo, hi):
            s += y[idx[i]]
        value[node] = s / m

        if m < min_samples_split:
            continue

        # SSE drop of a split equals sum_left^2/n_left + sum_right^2/n_right
        # - sum^2/n; strict > keeps the first (lowest feature, lowest
        # threshold) maximizer.
        best_gain = 0.0
        best_f = -1
        best_thr = 0.0
        base = s * s / m
        col = np.empty(m, np.float64)
        for j in range(d):
            for i in range(m):
                col[i] = X[idx[lo + i], j]
            order = np.argsort(col)
            cum = 0.0
            prev = col[order[0]]
            for i in range(m - 1):
                cum += y[idx[lo + order[i]]]
                cur = col[order[i + 1]]
                if cur > prev:
                    nl = i + 1
                    nr = m - nl
                    gain = cum * cum / nl + (s - cum) * (s - cum) / nr - base
                    if gain > best_gain:
                        best_gain = gain
                        best_f = j
                        best_thr = 0.5 * (prev + cur)
                prev = cur
        if best_f < 0:
            continue  # all features constant in this node

        nl = 0
        nr = 0
        for i in range(lo, hi):
            if X[idx[i], best_f] <= best_thr:
                idx[lo + nl] = idx[i]
                nl += 1
            else:
                buf[nr] = idx[i]
                nr += 1
        for i in range(nr):
            idx[lo + nl + i] = buf[i]

        lid = n_nodes
        rid = n_nodes + 1
        n_nodes += 2
        feature[node] = best_f
        threshold[node] = best_thr
        left[node] = lid
        right[node] = rid
        stack_node[top] = lid
        stack_lo[top] = lo
        stack_hi[top] = lo + nl
        top += 1
        stack_node[top] = rid
        stack_lo[top] = lo + nl
        stack_hi[top] = hi
        top += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(),
            left[:n_nodes].copy(), right[:n_nodes].copy(), value[:n_nodes].copy())


@njit(cache=True)
def _predict_tree(feature, threshold, left, right, value, X, out):
    for i in range(X.shape[0]):
        node = 0
        while feature[node] >= 0:
            if X[i, feature[node]] <= threshold[node]:
                node = left[node]
            else:
                node = right[node]
        out[i] = value[node]


@dataclasses.dataclass(frozen=True)
class Tree:
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    def predict(self, X):
        out = np.empty(X.shape[0], dtype=np.float64)
        _predict_tree(self.feature, self.threshold, self.left, self.right,
                      self.value, np.ascontiguousarray(X, dtype=np.float64), out)
        return out


@dataclasses.dataclass(frozen=True)
class ForestParams:
    trees: tuple


def fit_forest(X, y, n_trees, seed, min_samples_split=2) -> ForestParams:
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = X.shape[0]
    trees = []
    for t in range(n_trees):
        boot = rng.stream("rf", seed, t).integers(0, n, size=n)
        trees.append(Tree(*_grow_tree(X[boot], y[boot], min_samples_split)))
    return ForestParams(trees=tuple(trees))


def predict_forest(params: ForestParams, X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    preds = np.empty((len(params.trees), X.shape[0]), dtype=np.float64)
    for t, tree in enumerate(params.trees):
        _predict_tree(tree.feature, tree.threshold, tree.left, tree.right,
                      tree.value, X, preds[t])
    return preds.mean(axis=0)


def warm_up():
    """Trigger jit compilation on a toy problem (first call in a fresh
    environment otherwise pays the compile cost inside a timed run)."""
    X = np.arange(8.0).reshape(4, 2)
    y = np.array([0.0, 1.0, 0.0, 1.0])
    params = fit_forest(X, y, 1, seed=0)
    predict_forest(params, X)
