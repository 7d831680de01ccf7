"""Ordinary least squares via the normal equations."""

from __future__ import annotations

import dataclasses

import numpy as np


@dataclasses.dataclass(frozen=True)
class LinearParams:
    weights: np.ndarray
    intercept: float


def fit_linear(X, y) -> LinearParams:
    """Solve min ||Xw + b - y||^2 exactly.

    The Gram matrix gets a ridge term of 1e-8 times its mean diagonal entry
    when it is ill-conditioned (condition number above 1e12 or not positive
    definite), so singular designs are handled rather than rejected.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    A = np.column_stack([X, np.ones(X.shape[0])])
    G = A.T @ A
    rhs = A.T @ y
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > 1e12:
        G = G + (1e-8 * np.trace(G) / G.shape[0]) * np.eye(G.shape[0])
    try:
        coef = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        G = G + (1e-8 * np.trace(G) / G.shape[0]) * np.eye(G.shape[0])
        coef = np.linalg.solve(G, rhs)
    return LinearParams(weights=coef[:-1], intercept=float(coef[-1]))


def predict_linear(params: LinearParams, X) -> np.ndarray:
    return np.asarray(X, dtype=np.float64) @ params.weights + params.intercept
