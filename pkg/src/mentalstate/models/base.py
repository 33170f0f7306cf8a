"""Classifier abstraction shared by every model kind."""
from __future__ import annotations

import numpy as np

from ..errors import ParameterError
from ..features import N_CLASSES, N_FEATURES, WINDOW_WIDTH, NormalizationStats

KINDS = ("svm", "dnn", "cnn", "xgb", "random")
ALIASES = {"mlp": "dnn", "gbt": "xgb", "xgboost": "xgb"}


def canonical_kind(kind: str) -> str:
    kind = ALIASES.get(kind.lower(), kind.lower())
    if kind not in KINDS:
        raise ParameterError(f"unknown model kind {kind!r}; expected one of {', '.join(KINDS)}")
    return kind


def matmul(a: np.ndarray, b: np.ndarray, exact: bool = False) -> np.ndarray:
    """``a @ b``; with ``exact`` each output row is computed independently of the others.

    BLAS picks different kernels for different batch sizes, so a row scored in
    a batch of one can differ in the last bit from the same row scored in a
    larger batch. The einsum loop has a fixed reduction order per element.
    """
    if exact:
        return np.einsum("ij,jk->ik", a, b)
    return a @ b


def softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    total = e[:, 0].copy()
    for k in range(1, e.shape[1]):
        total += e[:, k]
    return e / total[:, None]


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def cross_entropy(probs: np.ndarray, y: np.ndarray) -> float:
    p = probs[np.arange(len(y)), y]
    return float(-np.mean(np.log(np.maximum(p, 1e-300))))


class Classifier:
    """A trained model: ``predict_scores`` maps raw inputs to ``(n, 3)`` scores."""

    kind: str = ""
    input_mode: str = "frame"
    window_width: int = WINDOW_WIDTH

    def __init__(self, normalizer: NormalizationStats | None = None):
        self.normalizer = normalizer or NormalizationStats.identity()
        self.history: dict[str, list[float]] = {}

    def check_input(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if self.input_mode == "frame":
            if X.ndim == 1:
                X = X[None]
            if X.ndim != 2 or X.shape[1] != N_FEATURES:
                raise ParameterError(
                    f"{self.kind} expects frame input (n, {N_FEATURES}), got shape {X.shape}"
                )
        else:
            if X.ndim == 2:
                X = X[None]
            if X.ndim != 3 or X.shape[1:] != (self.window_width, N_FEATURES):
                raise ParameterError(
                    f"{self.kind} expects window input (n, {self.window_width}, {N_FEATURES}), got shape {X.shape}"
                )
        return X

    def predict_scores(self, X) -> np.ndarray:
        X = self.check_input(X)
        if len(X) == 0:
            return np.zeros((0, N_CLASSES))
        return self._scores(self.normalizer.normalize(X))

    def predict_labels(self, X) -> np.ndarray:
        return np.argmax(self.predict_scores(X), axis=1)

    def _scores(self, Z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    # serialization hooks: JSON-able metadata plus named arrays
    def get_state(self) -> tuple[dict, dict[str, np.ndarray]]:
        raise NotImplementedError

    @classmethod
    def from_state(cls, meta: dict, arrays: dict[str, np.ndarray], normalizer: NormalizationStats):
        raise NotImplementedError
