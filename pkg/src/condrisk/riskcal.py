"""Conditional-risk estimation.

The target quantity is g(x), the expected loss of a fixed predictor at
input x. Two estimation routes are provided:

  regression-based   fit a regression model to realized sample losses
                     z_i = loss(fhat(x_i), y_i), optionally on the
                     predictor's penultimate-layer representation instead of
                     the raw features;
  plug-in            dot the per-class loss vector [loss(fhat(x), k)]_k with
                     an estimated class-probability vector, optionally after
                     temperature-scaling the probability model.

Both produce a RiskCalibrator whose estimate() method maps inputs to
nonnegative risk estimates, and both are scored with calib_error against
realized losses on held-out rows.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .data import SplitPlan, Standardizer, apply_standardizer, fit_standardizer
from .models import ModelSpec, Predictor, fit
from .models.mlp import softmax

LOSS_KINDS = ("squared", "absolute", "zero-one", "cross-entropy", "brier")
_CLASSIFICATION_KINDS = ("zero-one", "cross-entropy", "brier")


@dataclasses.dataclass(frozen=True)
class LossFn:
    kind: str
    clamp_eps: float = 1e-12

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ValueError(f"unknown loss kind {self.kind!r}")

    @property
    def classification_only(self) -> bool:
        return self.kind in _CLASSIFICATION_KINDS


@dataclasses.dataclass(frozen=True)
class CalibReport:
    mae: float
    mse: float
    n: int


def _clamped_proba(fhat: Predictor, loss: LossFn, X) -> np.ndarray:
    q = fhat.predict_proba(X)
    return np.clip(q, loss.clamp_eps, 1.0)


def sample_losses(fhat: Predictor, loss: LossFn, X, y) -> np.ndarray:
    """Realized per-sample losses z_i = loss(fhat(x_i), y_i)."""
    y = np.asarray(y)
    if loss.classification_only and fhat.spec.head != "classification":
        raise ValueError(f"{loss.kind} loss needs a classification predictor")
    if not loss.classification_only and fhat.spec.head != "regression":
        raise ValueError(f"{loss.kind} loss needs a regression predictor")

    if loss.kind == "squared":
        diff = fhat.predict(X) - y.astype(np.float64)
        return diff * diff
    if loss.kind == "absolute":
        return np.abs(fhat.predict(X) - y.astype(np.float64))

    y = y.astype(np.int64)
    if loss.kind == "zero-one":
        return (fhat.predict(X) != y).astype(np.float64)
    if loss.kind == "cross-entropy":
        q = _clamped_proba(fhat, loss, X)
        return -np.log(q[np.arange(len(y)), y])
    # brier: squared distance between the probability vector and the one-hot label
    q = fhat.predict_proba(X)
    q = q.copy()
    q[np.arange(len(y)), y] -= 1.0
    return (q * q).sum(axis=1)


def per_class_losses(fhat: Predictor, loss: LossFn, X) -> np.ndarray:
    """Matrix of loss(fhat(x_i), k) for every class k, shape (n, K)."""
    if not loss.classification_only:
        raise ValueError(f"{loss.kind} loss has no per-class decomposition here")
    if fhat.spec.head != "classification":
        raise ValueError("per-class losses need a classification predictor")
    K = fhat.spec.num_classes
    if loss.kind == "zero-one":
        labels = fhat.predict(X)
        M = np.ones((len(labels), K))
        M[np.arange(len(labels)), labels] = 0.0
        return M
    if loss.kind == "cross-entropy":
        return -np.log(_clamped_proba(fhat, loss, X))
    # brier: ||q - e_k||^2 = ||q||^2 - 2 q_k + 1
    q = fhat.predict_proba(X)
    return ((q * q).sum(axis=1) + 1.0)[:, None] - 2.0 * q


def plugin_risk(fhat: Predictor, phat, loss: LossFn, X, temperature=None) -> np.ndarray:
    """Plug-in risk estimate: per-class losses dotted with class probabilities.

    phat is a fitted classification Predictor, or a precomputed (n, K)
    probability matrix (used by the theory checks where the exact
    conditional distribution is known). temperature, if given, rescales
    phat's logits before the softmax.
    """
    M = per_class_losses(fhat, loss, X)
    if isinstance(phat, np.ndarray):
        probs = phat
        if temperature is not None:
            raise ValueError("temperature needs a logit-producing model, not a matrix")
    else:
        if phat.spec.num_classes != fhat.spec.num_classes:
            raise ValueError("predictor and probability model disagree on class count")
        if temperature is None:
            probs = phat.predict_proba(X)
        else:
            probs = softmax(phat.predict_logits(X) / temperature)
    if probs.shape != M.shape:
        raise ValueError(f"probability matrix shape {probs.shape} does not match {M.shape}")
    return (M * probs).sum(axis=1)


@dataclasses.dataclass
class RiskCalibrator:
    """A fitted conditional-risk estimator, either strategy."""

    strategy: str  # regression-based | plugin | plugin-temperature-scaled
    loss: LossFn
    model: Predictor | None = None        # regression-based backing model
    fhat: Predictor | None = None         # plug-in: the predictor whose risk is estimated
    proba_model: Predictor | None = None  # plug-in: class-probability backend
    temperature: float = 1.0
    input_mode: str = "raw"               # raw | representation
    rep_source: Predictor | None = None
    rep_scaler: Standardizer | None = None

    def estimate(self, X) -> np.ndarray:
        if self.strategy == "regression-based":
            inputs = np.asarray(X, dtype=np.float64)
            if self.input_mode == "representation":
                inputs = apply_standardizer(self.rep_scaler,
                                            self.rep_source.extract_representation(inputs))
            est = self.model.predict(inputs)
            # realized losses are nonnegative for every supported kind, so
            # negative extrapolations are estimation artifacts
            return np.maximum(est, 0.0)
        T = self.temperature if self.strategy == "plugin-temperature-scaled" else None
        return plugin_risk(self.fhat, self.proba_model, self.loss, X, temperature=T)


def fit_regression_calibrator(spec: ModelSpec, loss: LossFn, fhat: Predictor,
                              X_cal, y_cal, input_mode="raw", rep_source=None,
                              plan: SplitPlan | None = None, cal_rows=None) -> RiskCalibrator:
    """Fit the regression route on realized losses of fhat over the
    calibration rows.

    input_mode "representation" regresses on the penultimate activations of
    rep_source (default: fhat itself) instead of raw features; those get
    their own Standardizer since hidden-unit scales vary wildly.

    When both plan and cal_rows are given, the calibration rows are checked
    against the plan's regressor rows; overlap means the realized losses are
    training losses and the calibrator would inherit their optimism.
    """
    X_cal = np.asarray(X_cal, dtype=np.float64)
    if X_cal.ndim != 2 or X_cal.shape[0] == 0:
        raise ValueError("empty calibration set")
    if plan is not None and cal_rows is not None:
        overlap = set(np.asarray(cal_rows).tolist()) & set(plan.regressor_rows.tolist())
        if overlap:
            raise ValueError(f"calibration rows overlap predictor training rows: {sorted(overlap)[:5]}")
    if input_mode not in ("raw", "representation"):
        raise ValueError(f"unknown input_mode {input_mode!r}")

    z = sample_losses(fhat, loss, X_cal, y_cal)
    rep_scaler = None
    if input_mode == "representation":
        source = rep_source if rep_source is not None else fhat
        reps = source.extract_representation(X_cal)
        rep_scaler = fit_standardizer(reps)
        inputs = apply_standardizer(rep_scaler, reps)
        rep_source = source
    else:
        inputs = X_cal
        rep_source = None
    model, _ = fit(spec, inputs, z)
    return RiskCalibrator(strategy="regression-based", loss=loss, model=model,
                          input_mode=input_mode, rep_source=rep_source,
                          rep_scaler=rep_scaler)


def fit_plugin_calibrator(fhat: Predictor, proba_model: Predictor, loss: LossFn,
                          temperature: float | None = None) -> RiskCalibrator:
    """Assemble the plug-in route from already-fitted models."""
    if fhat.spec.head != "classification" or proba_model.spec.head != "classification":
        raise ValueError("plug-in calibration needs classification heads on both models")
    if fhat.spec.num_classes != proba_model.spec.num_classes:
        raise ValueError("predictor and probability model disagree on class count")
    if temperature is None:
        return RiskCalibrator(strategy="plugin", loss=loss, fhat=fhat, proba_model=proba_model)
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    return RiskCalibrator(strategy="plugin-temperature-scaled", loss=loss,
                          fhat=fhat, proba_model=proba_model, temperature=temperature)


@dataclasses.dataclass(frozen=True)
class TemperatureFit:
    temperature: float
    nll: float
    degenerate: bool  # calibration labels held a single class


def fit_temperature(phat: Predictor, X_cal, y_cal) -> TemperatureFit:
    """Pick T > 0 minimizing held-out NLL of softmax(logits / T).

    Golden-section search on log10 T over [-2, 2] to a bracket width of
    1e-4. A single-class calibration set still returns a T but is flagged
    degenerate (NLL then pushes T toward a bracket edge).
    """
    y = np.asarray(y_cal).astype(np.int64)
    if len(y) == 0:
        raise ValueError("empty calibration set")
    logits = phat.predict_logits(X_cal)
    degenerate = len(np.unique(y)) < 2
    rows = np.arange(len(y))

    def nll(log10_t):
        z = logits / (10.0 ** log10_t)
        m = z.max(axis=1, keepdims=True)
        lse = (m[:, 0] + np.log(np.exp(z - m).sum(axis=1)))
        return float(np.mean(lse - z[rows, y]))

    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = -2.0, 2.0
    c = b - inv_phi * (b - a)
    d = a + inv_phi * (b - a)
    fc, fd = nll(c), nll(d)
    while b - a > 1e-4:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - inv_phi * (b - a)
            fc = nll(c)
        else:
            a, c, fc = c, d, fd
            d = a + inv_phi * (b - a)
            fd = nll(d)
    best = 0.5 * (a + b)
    return TemperatureFit(temperature=10.0 ** best, nll=nll(best), degenerate=degenerate)


def calib_error(ghat: RiskCalibrator, fhat: Predictor, loss: LossFn, X_test, y_test) -> CalibReport:
    """Score risk estimates against realized losses on held-out rows."""
    X_test = np.asarray(X_test, dtype=np.float64)
    if X_test.shape[0] == 0:
        raise ValueError("empty evaluation set")
    z = sample_losses(fhat, loss, X_test, y_test)
    est = ghat.estimate(X_test)
    diff = est - z
    return CalibReport(mae=float(np.mean(np.abs(diff))),
                       mse=float(np.mean(diff * diff)),
                       n=len(z))
