"""Classifier families behind one ``train`` / ``predict`` / ``save`` / ``load`` surface."""
from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from ..features import N_CLASSES, fit_normalizer
from .base import KINDS, Classifier, canonical_kind
from .baseline import RandomModel
from .cnn import CnnModel, cnn_forward, train_cnn
from .config import (
    CnnConfig,
    GbtConfig,
    MlpConfig,
    SvmConfig,
    TrainConfig,
    coerce_overrides,
    default_config,
)
from .gbt import GbtModel, Tree, gbt_fit_tree, train_gbt
from .io import FORMAT_VERSION, MAGIC, dumps, load, loads, save
from .mlp import MlpModel, mlp_backprop_step, train_mlp
from .svm import SvmModel, smo_solve, train_svm

INPUT_MODE = {"svm": "frame", "dnn": "frame", "xgb": "frame", "random": "frame", "cnn": "window"}
_TRAINERS = {"svm": train_svm, "dnn": train_mlp, "cnn": train_cnn, "xgb": train_gbt}


def _unpack(data):
    if hasattr(data, "X") and hasattr(data, "y"):
        return np.asarray(data.X, dtype=np.float64), np.asarray(data.y, dtype=np.int64)
    X, y = data
    return np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.int64)


def train(kind: str, data, config: TrainConfig | None = None) -> Classifier:
    """Fit a classifier of ``kind`` on a LabeledDataset or an ``(X, y)`` pair.

    A z-score normalizer is fitted on the training inputs and stored with
    the model; every later prediction applies it first.
    """
    kind = canonical_kind(kind)
    config = (config or default_config(kind)).validate()
    X, y = _unpack(data)
    if len(y) == 0:
        raise ParameterError("cannot train on an empty dataset")
    if y.min() < 0 or y.max() >= N_CLASSES:
        raise ParameterError("labels must lie in {0, 1, 2}")
    mode = "window" if X.ndim == 3 else "frame"
    if mode != INPUT_MODE[kind]:
        if kind == "cnn":
            raise ParameterError("cnn needs window input (n, 20, 11); window the frames first (e.g. --windowed)")
        raise ParameterError(f"{kind} needs frame input (n, 11), got windows of shape {X.shape}")
    if kind == "random":
        return RandomModel(config.seed)
    normalizer = fit_normalizer(X)
    return _TRAINERS[kind](normalizer.normalize(X), y, config, normalizer)


def predict(model: Classifier, x) -> tuple[int, np.ndarray]:
    """Label and 3 class scores for a single frame or window."""
    x = getattr(x, "values", x)
    scores = model.predict_scores(x)
    if len(scores) != 1:
        raise ParameterError("predict takes a single input; use model.predict_scores for batches")
    return int(np.argmax(scores[0])), scores[0]


__all__ = [
    "KINDS", "INPUT_MODE", "Classifier", "train", "predict", "save", "load", "dumps", "loads",
    "SvmModel", "MlpModel", "CnnModel", "GbtModel", "RandomModel", "Tree",
    "TrainConfig", "SvmConfig", "MlpConfig", "CnnConfig", "GbtConfig", "default_config", "coerce_overrides",
    "mlp_backprop_step", "cnn_forward", "gbt_fit_tree", "smo_solve", "FORMAT_VERSION", "MAGIC",
]
