"""Two-layer convolutional network over 20x11 window maps (NHWC, valid padding).

20x11x1 -> conv3x3(32) -> 18x9x32 -> maxpool2 -> 9x4x32 -> conv3x3(64) -> 7x2x64
-> flatten 896 -> dense 32 -> dense 3 -> softmax.
"""
from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ..errors import ParameterError
from ..features import N_CLASSES, N_FEATURES, WINDOW_WIDTH, NormalizationStats
from .base import Classifier, cross_entropy, matmul, relu, softmax
from .config import CnnConfig
from .neural import fit_network, uniform_fan_in

KERNEL = 3
POOL = 2


def im2col(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    """``(B, H, W, C)`` -> ``(B*Ho*Wo, kh*kw*C)`` patches ordered (kh, kw, C)."""
    B, H, W, C = x.shape
    patches = sliding_window_view(x, (kh, kw), axis=(1, 2))  # B, Ho, Wo, C, kh, kw
    return patches.transpose(0, 1, 2, 4, 5, 3).reshape(B * (H - kh + 1) * (W - kw + 1), kh * kw * C)


def conv2d_forward(x: np.ndarray, W: np.ndarray, b: np.ndarray, exact: bool = False):
    kh, kw, C, F = W.shape
    B, H, Wd, _ = x.shape
    Ho, Wo = H - kh + 1, Wd - kw + 1
    if Ho <= 0 or Wo <= 0:
        raise ParameterError(f"input {H}x{Wd} too small for a {kh}x{kw} kernel")
    cols = im2col(x, kh, kw)
    out = matmul(cols, W.reshape(kh * kw * C, F), exact) + b
    return out.reshape(B, Ho, Wo, F), cols


def conv2d_backward(dout: np.ndarray, cols: np.ndarray, x_shape, W: np.ndarray):
    kh, kw, C, F = W.shape
    B, Ho, Wo, _ = dout.shape
    d2 = dout.reshape(-1, F)
    dW = (cols.T @ d2).reshape(W.shape)
    db = d2.sum(axis=0)
    dcols = (d2 @ W.reshape(kh * kw * C, F).T).reshape(B, Ho, Wo, kh, kw, C)
    dx = np.zeros(x_shape)
    for i in range(kh):
        for j in range(kw):
            dx[:, i : i + Ho, j : j + Wo, :] += dcols[:, :, :, i, j, :]
    return dx, dW, db


def maxpool_forward(x: np.ndarray, size: int = POOL):
    """Non-overlapping max pool; trailing rows/cols that do not fill a window are dropped."""
    B, H, W, C = x.shape
    Ho, Wo = H // size, W // size
    blocks = x[:, : Ho * size, : Wo * size].reshape(B, Ho, size, Wo, size, C)
    blocks = blocks.transpose(0, 1, 3, 5, 2, 4).reshape(B, Ho, Wo, C, size * size)
    idx = np.argmax(blocks, axis=-1)
    out = np.take_along_axis(blocks, idx[..., None], axis=-1)[..., 0]
    return out, idx


def maxpool_backward(dout: np.ndarray, idx: np.ndarray, x_shape, size: int = POOL):
    B, H, W, C = x_shape
    Ho, Wo = H // size, W // size
    blocks = np.zeros((B, Ho, Wo, C, size * size))
    np.put_along_axis(blocks, idx[..., None], dout[..., None], axis=-1)
    blocks = blocks.reshape(B, Ho, Wo, C, size, size).transpose(0, 1, 4, 2, 5, 3)
    dx = np.zeros(x_shape)
    dx[:, : Ho * size, : Wo * size] = blocks.reshape(B, Ho * size, Wo * size, C)
    return dx


def layer_shapes(input_hw=(WINDOW_WIDTH, N_FEATURES), filters=(32, 64), dense=32) -> list[tuple[int, ...]]:
    """Activation shapes from input to output, excluding the batch axis."""
    h, w = input_hw
    shapes = [(h, w, 1)]
    h, w = h - KERNEL + 1, w - KERNEL + 1
    shapes.append((h, w, filters[0]))
    h, w = h // POOL, w // POOL
    shapes.append((h, w, filters[0]))
    h, w = h - KERNEL + 1, w - KERNEL + 1
    shapes.append((h, w, filters[1]))
    shapes += [(h * w * filters[1],), (dense,), (N_CLASSES,)]
    return shapes


class CnnModel(Classifier):
    kind = "cnn"
    input_mode = "window"

    def __init__(self, params: dict[str, np.ndarray], input_hw=(WINDOW_WIDTH, N_FEATURES),
                 normalizer: NormalizationStats | None = None):
        super().__init__(normalizer)
        self.params = params
        self.input_hw = tuple(input_hw)
        self.window_width = self.input_hw[0]

    @classmethod
    def initialize(cls, rng: np.random.Generator, input_hw=(WINDOW_WIDTH, N_FEATURES),
                   filters=(32, 64), dense=32, normalizer=None) -> "CnnModel":
        shapes = layer_shapes(input_hw, filters, dense)
        if min(shapes[3][:2]) <= 0:
            raise ParameterError(f"input {input_hw} too small for the conv stack")
        f1, f2 = filters
        flat = shapes[4][0]
        params = {
            "conv1_W": uniform_fan_in(rng, (KERNEL, KERNEL, 1, f1), KERNEL * KERNEL),
            "conv1_b": np.zeros(f1),
            "conv2_W": uniform_fan_in(rng, (KERNEL, KERNEL, f1, f2), KERNEL * KERNEL * f1),
            "conv2_b": np.zeros(f2),
            "dense1_W": uniform_fan_in(rng, (flat, dense), flat),
            "dense1_b": np.zeros(dense),
            "dense2_W": uniform_fan_in(rng, (dense, N_CLASSES), dense),
            "dense2_b": np.zeros(N_CLASSES),
        }
        return cls(params, input_hw, normalizer)

    @classmethod
    def zeros(cls, input_hw=(WINDOW_WIDTH, N_FEATURES), filters=(32, 64), dense=32) -> "CnnModel":
        model = cls.initialize(np.random.default_rng(0), input_hw, filters, dense)
        for v in model.params.values():
            v[...] = 0.0
        return model

    def _forward(self, Z: np.ndarray, exact: bool):
        p = self.params
        x0 = Z[..., None]
        z1, cols1 = conv2d_forward(x0, p["conv1_W"], p["conv1_b"], exact)
        a1 = relu(z1)
        p1, idx1 = maxpool_forward(a1)
        z2, cols2 = conv2d_forward(p1, p["conv2_W"], p["conv2_b"], exact)
        a2 = relu(z2)
        flat = a2.reshape(len(Z), -1)
        z3 = matmul(flat, p["dense1_W"], exact) + p["dense1_b"]
        a3 = relu(z3)
        z4 = matmul(a3, p["dense2_W"], exact) + p["dense2_b"]
        cache = (x0, cols1, z1, a1, p1, idx1, cols2, z2, flat, z3, a3)
        return z4, cache

    def activations(self, Z: np.ndarray) -> list[np.ndarray]:
        """Intermediate tensors for shape inspection: input, conv1, pool, conv2, flatten, dense1, logits."""
        z4, (x0, _, _, a1, p1, _, _, z2, flat, _, a3) = self._forward(Z, exact=True)
        return [x0, a1, p1, relu(z2), flat, a3, z4]

    def logits(self, Z: np.ndarray, exact: bool = False) -> np.ndarray:
        return self._forward(Z, exact)[0]

    def _scores(self, Z):
        return softmax(self.logits(Z, exact=True))

    def loss_and_grads(self, Z: np.ndarray, y: np.ndarray, need_grads: bool = True):
        p = self.params
        z4, (x0, cols1, z1, a1, p1, idx1, cols2, z2, flat, z3, a3) = self._forward(Z, exact=False)
        probs = softmax(z4)
        loss = cross_entropy(probs, y)
        if not need_grads:
            return loss, None
        n = len(y)
        d4 = probs.copy()
        d4[np.arange(n), y] -= 1.0
        d4 /= n
        g = {"dense2_W": a3.T @ d4, "dense2_b": d4.sum(axis=0)}
        d3 = (d4 @ p["dense2_W"].T) * (z3 > 0)
        g["dense1_W"] = flat.T @ d3
        g["dense1_b"] = d3.sum(axis=0)
        dflat = d3 @ p["dense1_W"].T
        d2 = dflat.reshape(z2.shape) * (z2 > 0)
        dp1, g["conv2_W"], g["conv2_b"] = conv2d_backward(d2, cols2, p1.shape, p["conv2_W"])
        da1 = maxpool_backward(dp1, idx1, a1.shape)
        d1 = da1 * (z1 > 0)
        _, g["conv1_W"], g["conv1_b"] = conv2d_backward(d1, cols1, x0.shape, p["conv1_W"])
        return loss, g

    def get_state(self):
        meta = {
            "input_hw": list(self.input_hw),
            "filters": [self.params["conv1_W"].shape[3], self.params["conv2_W"].shape[3]],
            "dense": self.params["dense1_W"].shape[1],
        }
        return meta, dict(self.params)

    @classmethod
    def from_state(cls, meta, arrays, normalizer):
        return cls(dict(arrays), tuple(meta["input_hw"]), normalizer)


def cnn_forward(model: CnnModel, window) -> np.ndarray:
    """Class probabilities for one ``(20, 11)`` window map."""
    return model.predict_scores(getattr(window, "values", window))[0]


def train_cnn(Z: np.ndarray, y: np.ndarray, config: CnnConfig, normalizer) -> CnnModel:
    rng = np.random.default_rng(config.seed)
    model = CnnModel.initialize(rng, Z.shape[1:], tuple(config.filters), config.dense, normalizer)
    model.history = fit_network(model, Z, y, config, rng)
    return model
