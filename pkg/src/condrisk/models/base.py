"""Shared fit/predict contract over the model families.

Families and their heads:
  lr             regression, ordinary least squares
  rf             regression, 100-tree bootstrap forest
  mlp            regression net, one hidden layer of 64
  mlp2           regression net, hidden layers 64, 64
  softmax_linear classification, no hidden layer (weak tier)
  softmax_mlp    classification net, hidden widths settable through
                 ``hidden`` ((64,) medium tier, (64, 64) strong tier)

A ``standardize`` flag makes fit() attach a feature Standardizer learned
from the training rows; prediction then applies it transparently. Targets
are never rescaled.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from ..data import Standardizer, fit_standardizer, apply_standardizer
from .. import rng
from . import forest, linear, mlp

FAMILIES = ("lr", "rf", "mlp", "mlp2", "softmax_linear", "softmax_mlp")
_NET_FAMILIES = ("mlp", "mlp2", "softmax_linear", "softmax_mlp")
_HIDDEN = {"mlp": (64,), "mlp2": (64, 64), "softmax_linear": ()}


@dataclasses.dataclass(frozen=True)
class ModelSpec:
    family: str
    seed: int = 0
    num_classes: int | None = None
    hidden: tuple | None = None  # softmax_mlp only; defaults to (64,)
    standardize: bool = False
    n_trees: int = 100
    batch_size: int = 256
    learning_rate: float = 5e-4
    max_epochs: int = 800

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}")
        if self.hidden is not None and self.family != "softmax_mlp":
            raise ValueError("hidden widths can only be set for softmax_mlp")
        if self.head == "classification":
            if self.num_classes is None or self.num_classes < 2:
                raise ValueError(f"{self.family} needs num_classes >= 2")
        if self.hidden is not None:
            object.__setattr__(self, "hidden", tuple(int(w) for w in self.hidden))

    @property
    def head(self) -> str:
        return "classification" if self.family.startswith("softmax") else "regression"

    @property
    def hidden_widths(self):
        if self.family == "softmax_mlp":
            return self.hidden if self.hidden is not None else (64,)
        return _HIDDEN.get(self.family)


@dataclasses.dataclass(frozen=True)
class TrainReport:
    final_loss: float
    epochs_run: int
    converged: bool


@dataclasses.dataclass
class Predictor:
    spec: ModelSpec
    input_dim: int
    params: object
    scaler: Standardizer | None = None
    fitted: bool = True

    def _prep(self, X):
        if not self.fitted:
            raise ValueError("predictor is not fitted")
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(1, -1)
        if X.ndim != 2 or X.shape[1] != self.input_dim:
            raise ValueError(f"expected inputs with {self.input_dim} columns, got shape {X.shape}")
        if self.scaler is not None:
            X = apply_standardizer(self.scaler, X)
        return X

    def predict(self, X) -> np.ndarray:
        X = self._prep(X)
        fam = self.spec.family
        if fam == "lr":
            return linear.predict_linear(self.params, X)
        if fam == "rf":
            return forest.predict_forest(self.params, X)
        out, _ = mlp.forward(self.params, X)
        if self.spec.head == "regression":
            return out[:, 0]
        return out.argmax(axis=1).astype(np.int64)

    def predict_logits(self, X) -> np.ndarray:
        if self.spec.head != "classification":
            raise ValueError("logits are only defined for classification heads")
        X = self._prep(X)
        out, _ = mlp.forward(self.params, X)
        return out

    def predict_proba(self, X) -> np.ndarray:
        return mlp.softmax(self.predict_logits(X))

    def extract_representation(self, X) -> np.ndarray:
        if self.spec.family not in _NET_FAMILIES or not self.spec.hidden_widths:
            raise ValueError(f"{self.spec.family} has no hidden layer to extract")
        return mlp.representation(self.params, self._prep(X))


def fit(spec: ModelSpec, X, y):
    """Train one model. Returns (Predictor, TrainReport).

    Deterministic in (spec, data): every random draw comes from streams
    derived from spec.seed.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] == 0:
        raise ValueError("X must be a nonempty 2-D matrix")
    y = np.asarray(y)
    if y.ndim != 1 or len(y) != X.shape[0]:
        raise ValueError("y length must match X rows")
    if spec.head == "classification":
        y = y.astype(np.int64)
        if y.min() < 0 or y.max() >= spec.num_classes:
            raise ValueError("class labels outside [0, num_classes)")
    else:
        y = y.astype(np.float64)

    scaler = None
    Xs = X
    if spec.standardize:
        scaler = fit_standardizer(X)
        Xs = apply_standardizer(scaler, X)

    fam = spec.family
    if fam == "lr":
        params = linear.fit_linear(Xs, y)
        resid = linear.predict_linear(params, Xs) - y
        report = TrainReport(float(resid @ resid) / len(y), 0, True)
    elif fam == "rf":
        params = forest.fit_forest(Xs, y, spec.n_trees, spec.seed)
        resid = forest.predict_forest(params, Xs) - y
        report = TrainReport(float(resid @ resid) / len(y), 0, True)
    else:
        d_out = 1 if spec.head == "regression" else spec.num_classes
        params, final_loss, epochs, converged = mlp.train(
            Xs, y, spec.hidden_widths, spec.head, d_out, spec.seed,
            scope=("fit", fam), batch_size=spec.batch_size,
            learning_rate=spec.learning_rate, max_epochs=spec.max_epochs)
        report = TrainReport(final_loss, epochs, converged)
    return Predictor(spec=spec, input_dim=X.shape[1], params=params, scaler=scaler), report


def gradient_check(spec: ModelSpec, X, y, step=1e-5) -> float:
    """Max relative error between analytic and central-difference gradients
    at the spec's initialization point. Small batches only (n <= 32)."""
    if spec.family not in _NET_FAMILIES:
        raise ValueError("gradient_check applies to the network families")
    X = np.asarray(X, dtype=np.float64)
    if X.shape[0] > 32:
        raise ValueError("gradient_check is meant for small batches (n <= 32)")
    y = np.asarray(y)
    d_out = 1 if spec.head == "regression" else spec.num_classes
    if spec.head == "classification":
        y = y.astype(np.int64)
    else:
        y = y.astype(np.float64)
    gen = rng.stream("gradcheck", spec.family, spec.seed)
    params = mlp.init_params(X.shape[1], spec.hidden_widths, d_out, gen)
    _, gw, gb = mlp.loss_and_grads(params, X, y, spec.head)
    numeric, masks = mlp.numeric_gradient(params, X, y, spec.head, step=step)
    worst = 0.0
    for a, b, m in zip(gw + gb, numeric, masks):
        # compare only coordinates whose difference bracket stays on one
        # side of every ReLU kink; per-tensor max-norm ratio
        if not m.any():
            continue
        denom = max(np.abs(a[m]).max(), np.abs(b[m]).max(), 1e-12)
        worst = max(worst, float(np.abs((a - b)[m]).max() / denom))
    return worst
