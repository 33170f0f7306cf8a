"""Fully connected ReLU network with a softmax output (11 -> 450 -> 450 -> 3 by default)."""
from __future__ import annotations

import numpy as np

from ..errors import ParameterError, TrainingDivergedError
from ..features import N_CLASSES, N_FEATURES, NormalizationStats
from .base import Classifier, cross_entropy, matmul, relu, softmax
from .config import MlpConfig
from .neural import Adagrad, fit_network, uniform_fan_in


class MlpModel(Classifier):
    kind = "dnn"
    input_mode = "frame"

    def __init__(self, params: dict[str, np.ndarray], normalizer: NormalizationStats | None = None):
        super().__init__(normalizer)
        self.params = params

    @property
    def n_layers(self) -> int:
        return len(self.params) // 2

    @property
    def sizes(self) -> tuple[int, ...]:
        return (self.params["W0"].shape[0],) + tuple(self.params[f"W{i}"].shape[1] for i in range(self.n_layers))

    @property
    def n_parameters(self) -> int:
        return sum(v.size for v in self.params.values())

    @classmethod
    def initialize(cls, sizes, rng: np.random.Generator, normalizer=None) -> "MlpModel":
        params = {}
        for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
            params[f"W{i}"] = uniform_fan_in(rng, (fan_in, fan_out), fan_in)
            params[f"b{i}"] = np.zeros(fan_out)
        return cls(params, normalizer)

    @classmethod
    def zeros(cls, sizes=(N_FEATURES, 450, 450, N_CLASSES)) -> "MlpModel":
        params = {}
        for i, (a, b) in enumerate(zip(sizes[:-1], sizes[1:])):
            params[f"W{i}"], params[f"b{i}"] = np.zeros((a, b)), np.zeros(b)
        return cls(params)

    def logits(self, Z: np.ndarray, exact: bool = False) -> np.ndarray:
        h = Z
        last = self.n_layers - 1
        for i in range(self.n_layers):
            h = matmul(h, self.params[f"W{i}"], exact) + self.params[f"b{i}"]
            if i < last:
                h = relu(h)
        return h

    def _scores(self, Z):
        return softmax(self.logits(Z, exact=True))

    def loss_and_grads(self, Z: np.ndarray, y: np.ndarray, need_grads: bool = True):
        """Mean cross-entropy over the batch and its gradient for every parameter."""
        acts = [Z]
        h = Z
        last = self.n_layers - 1
        for i in range(self.n_layers):
            h = h @ self.params[f"W{i}"] + self.params[f"b{i}"]
            if i < last:
                h = relu(h)
            acts.append(h)
        probs = softmax(h)
        loss = cross_entropy(probs, y)
        if not need_grads:
            return loss, None
        n = len(y)
        delta = probs.copy()
        delta[np.arange(n), y] -= 1.0
        delta /= n
        grads = {}
        for i in range(last, -1, -1):
            grads[f"W{i}"] = acts[i].T @ delta
            grads[f"b{i}"] = delta.sum(axis=0)
            if i > 0:
                delta = (delta @ self.params[f"W{i}"].T) * (acts[i] > 0)
        return loss, grads

    def get_state(self):
        return {"sizes": list(self.sizes)}, dict(self.params)

    @classmethod
    def from_state(cls, meta, arrays, normalizer):
        n_layers = len(meta["sizes"]) - 1
        params = {}
        for i in range(n_layers):
            params[f"W{i}"], params[f"b{i}"] = arrays[f"W{i}"], arrays[f"b{i}"]
        return cls(params, normalizer)


def mlp_backprop_step(model: MlpModel, Z: np.ndarray, y: np.ndarray, optimizer: Adagrad):
    """One gradient step on a batch; returns ``(model, loss)`` with params updated in place."""
    if len(y) == 0:
        raise ParameterError("empty batch")
    loss, grads = model.loss_and_grads(Z, y)
    if not np.isfinite(loss):
        raise TrainingDivergedError(0, loss)
    optimizer.step(model.params, grads)
    return model, loss


def train_mlp(Z: np.ndarray, y: np.ndarray, config: MlpConfig, normalizer) -> MlpModel:
    rng = np.random.default_rng(config.seed)
    sizes = (Z.shape[1],) + tuple(config.hidden) + (N_CLASSES,)
    model = MlpModel.initialize(sizes, rng, normalizer)
    model.history = fit_network(model, Z, y, config, rng)
    return model
