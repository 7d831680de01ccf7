"""Deferral layer: threshold rejector and rejection-loss evaluation.

A prediction is accepted when the estimated conditional risk is at most the
deferral cost c (ties accept); deferred points pay c instead of their
realized loss. The unattainable oracle that defers exactly when the
realized loss exceeds c achieves mean min(loss, c), a lower bound reported
alongside every evaluation.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from .models import Predictor
from .riskcal import LossFn, RiskCalibrator, sample_losses


@dataclasses.dataclass(frozen=True)
class Rejector:
    calibrator: RiskCalibrator
    cost: float

    def __post_init__(self):
        if self.cost <= 0:
            raise ValueError("deferral cost must be positive")

    def decisions(self, X) -> np.ndarray:
        """True where the prediction is accepted."""
        return self.calibrator.estimate(X) <= self.cost


@dataclasses.dataclass(frozen=True)
class DeferReport:
    rwr_loss: float
    reject_rate: float
    accepted_mean_loss: float
    all_deferred: bool
    oracle_rwr_loss: float
    n: int


def evaluate_precomputed(z, est, cost) -> DeferReport:
    """Score a cost threshold against precomputed losses z and estimates est."""
    accept = est <= cost
    rwr = float(np.where(accept, z, cost).mean())
    any_accepted = bool(accept.any())
    return DeferReport(
        rwr_loss=rwr,
        reject_rate=float(1.0 - accept.mean()),
        accepted_mean_loss=float(z[accept].mean()) if any_accepted else 0.0,
        all_deferred=not any_accepted,
        oracle_rwr_loss=float(np.minimum(z, cost).mean()),
        n=len(z),
    )


def evaluate_rwr(rej: Rejector, fhat: Predictor, loss: LossFn, X_test, y_test) -> DeferReport:
    X_test = np.asarray(X_test, dtype=np.float64)
    if X_test.shape[0] == 0:
        raise ValueError("empty test set")
    if rej.cost <= 0:
        raise ValueError("deferral cost must be positive")
    z = sample_losses(fhat, loss, X_test, y_test)
    est = rej.calibrator.estimate(X_test)
    return evaluate_precomputed(z, est, rej.cost)


def evaluate_l2d_classification(rej: Rejector, fhat: Predictor, loss: LossFn,
                                X_test, y_test) -> DeferReport:
    """Same arithmetic with a classifier paying clamped cross-entropy."""
    if fhat.spec.head != "classification":
        raise ValueError("classification deferral needs a classification predictor")
    if loss.kind != "cross-entropy":
        raise ValueError("classification deferral is scored with cross-entropy")
    return evaluate_rwr(rej, fhat, loss, X_test, y_test)


def sweep_costs(calibrator: RiskCalibrator, fhat: Predictor, loss: LossFn,
                costs, X_test, y_test) -> list[DeferReport]:
    """Evaluate one calibrator across a sorted ascending list of costs.

    Risk estimates and realized losses are computed once and reused.
    """
    costs = [float(c) for c in costs]
    if not costs:
        raise ValueError("empty cost list")
    if any(c <= 0 for c in costs):
        raise ValueError("costs must be strictly positive")
    if costs != sorted(costs):
        raise ValueError("costs must be sorted ascending")
    X_test = np.asarray(X_test, dtype=np.float64)
    if X_test.shape[0] == 0:
        raise ValueError("empty test set")
    z = sample_losses(fhat, loss, X_test, y_test)
    est = calibrator.estimate(X_test)
    return [evaluate_precomputed(z, est, c) for c in costs]
