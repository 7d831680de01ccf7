"""Predictor persistence.

One .npz archive per predictor. Arrays are stored as .npy members, whose
headers declare dtype and byte order, so files move between machines. A
JSON metadata entry carries the format version, the ModelSpec fields, and
the input dimension; loading an unknown version fails loudly.
"""

from __future__ import annotations

import dataclasses
import json

import numpy as np

from ..data import Standardizer
from . import forest, linear, mlp
from .base import ModelSpec, Predictor

FORMAT_VERSION = 1


def save_predictor(pred: Predictor, path) -> None:
    spec_fields = dataclasses.asdict(pred.spec)
    if spec_fields["hidden"] is not None:
        spec_fields["hidden"] = list(spec_fields["hidden"])
    meta = {
        "format_version": FORMAT_VERSION,
        "spec": spec_fields,
        "input_dim": pred.input_dim,
        "has_scaler": pred.scaler is not None,
    }
    arrays = {"meta": np.array(json.dumps(meta))}
    if pred.scaler is not None:
        arrays["scaler_means"] = pred.scaler.means
        arrays["scaler_scales"] = pred.scaler.scales

    fam = pred.spec.family
    if fam == "lr":
        arrays["w"] = pred.params.weights
        arrays["b"] = np.array(pred.params.intercept)
    elif fam == "rf":
        for t, tree in enumerate(pred.params.trees):
            arrays[f"t{t}_feature"] = tree.feature
            arrays[f"t{t}_threshold"] = tree.threshold
            arrays[f"t{t}_left"] = tree.left
            arrays[f"t{t}_right"] = tree.right
            arrays[f"t{t}_value"] = tree.value
        arrays["n_stored_trees"] = np.array(len(pred.params.trees))
    else:
        for i, (W, b) in enumerate(zip(pred.params.weights, pred.params.biases)):
            arrays[f"W{i}"] = W
            arrays[f"b{i}"] = b
        arrays["n_layers"] = np.array(len(pred.params.weights))
    np.savez(path, **arrays)


def load_predictor(path) -> Predictor:
    with np.load(path, allow_pickle=False) as archive:
        meta = json.loads(str(archive["meta"]))
        if meta.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported predictor file version {meta.get('format_version')}")
        spec_fields = dict(meta["spec"])
        if spec_fields.get("hidden") is not None:
            spec_fields["hidden"] = tuple(spec_fields["hidden"])
        spec = ModelSpec(**spec_fields)

        scaler = None
        if meta["has_scaler"]:
            scaler = Standardizer(means=archive["scaler_means"], scales=archive["scaler_scales"])

        fam = spec.family
        if fam == "lr":
            params = linear.LinearParams(weights=archive["w"], intercept=float(archive["b"]))
        elif fam == "rf":
            trees = []
            for t in range(int(archive["n_stored_trees"])):
                trees.append(forest.Tree(
                    feature=archive[f"t{t}_feature"],
                    threshold=archive[f"t{t}_threshold"],
                    left=archive[f"t{t}_left"],
                    right=archive[f"t{t}_right"],
                    value=archive[f"t{t}_value"],
                ))
            params = forest.ForestParams(trees=tuple(trees))
        else:
            n_layers = int(archive["n_layers"])
            params = mlp.MLPParams(
                weights=[archive[f"W{i}"] for i in range(n_layers)],
                biases=[archive[f"b{i}"] for i in range(n_layers)],
            )
    return Predictor(spec=spec, input_dim=meta["input_dim"], params=params, scaler=scaler)
