"""Adagrad mini-batch training loop shared by the dense and convolutional nets."""
from __future__ import annotations

import numpy as np

from ..errors import TrainingDivergedError
from .config import NeuralConfig


class Adagrad:
    def __init__(self, params: dict[str, np.ndarray], learning_rate: float,
                 initial_accumulator: float = 0.1, eps: float = 1e-7):
        self.learning_rate = learning_rate
        self.eps = eps
        self.accum = {k: np.full_like(v, initial_accumulator) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: dict[str, np.ndarray]) -> None:
        for name, g in grads.items():
            acc = self.accum[name]
            acc += g * g
            params[name] -= self.learning_rate * g / (np.sqrt(acc) + self.eps)


def uniform_fan_in(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


def train_loss(model, Z: np.ndarray, y: np.ndarray, chunk: int = 1024) -> float:
    total = 0.0
    for s in range(0, len(y), chunk):
        loss, _ = model.loss_and_grads(Z[s : s + chunk], y[s : s + chunk], need_grads=False)
        total += loss * len(y[s : s + chunk])
    return total / len(y)


def fit_network(model, Z: np.ndarray, y: np.ndarray, config: NeuralConfig, rng: np.random.Generator) -> dict:
    """Train ``model.params`` in place with early stopping on the training loss.

    Returns the history: ``loss`` is the full-pass training loss after each
    epoch, ``best_loss`` the loss of the kept checkpoint (non-increasing).
    The best checkpoint is restored before returning.
    """
    opt = Adagrad(model.params, config.learning_rate, config.initial_accumulator)
    n = len(y)
    best = train_loss(model, Z, y)
    best_params = {k: v.copy() for k, v in model.params.items()}
    history = {"loss": [best], "best_loss": [best]}
    wait = 0
    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(n)
        for s in range(0, n, config.batch_size):
            idx = order[s : s + config.batch_size]
            loss, grads = model.loss_and_grads(Z[idx], y[idx])
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch, loss)
            opt.step(model.params, grads)
        loss = train_loss(model, Z, y)
        if not np.isfinite(loss):
            raise TrainingDivergedError(epoch, loss)
        history["loss"].append(loss)
        if loss < best:
            best, wait = loss, 0
            best_params = {k: v.copy() for k, v in model.params.items()}
        else:
            wait += 1
        history["best_loss"].append(best)
        if wait >= config.patience:
            break
    model.params.update(best_params)
    return history
