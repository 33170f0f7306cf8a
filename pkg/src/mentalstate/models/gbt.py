"""Second-order gradient boosted regression trees with a softmax objective.

Trees are grown greedily: a node is split on the feature/threshold with the
largest gain

    1/2 [ G_L^2/(H_L+lam) + G_R^2/(H_R+lam) - G^2/(H+lam) ] - gamma

provided the gain is strictly positive and both children carry at least
``min_child_weight`` hessian. Leaves predict ``-G/(H+lam)``. Rows with
``x[f] < threshold`` go left.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..features import N_CLASSES, NormalizationStats
from .base import Classifier, cross_entropy, softmax
from .config import GbtConfig

HESS_FLOOR = 1e-16
# split scores this close (relative) count as tied; ties go to the lower feature, then the lower threshold
GAIN_TIE_RTOL = 1e-12


@dataclass
class Tree:
    """Flat node arrays; a leaf has ``feature == -1`` and points to itself."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    gain: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def depth(self) -> int:
        depth = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.feature[node] >= 0:
                depth[self.left[node]] = depth[self.right[node]] = depth[node] + 1
        return int(depth.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf index reached by each row."""
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        for _ in range(self.n_nodes):
            f = self.feature[node]
            inner = f >= 0
            if not inner.any():
                break
            go_left = X[rows, np.maximum(f, 0)] < self.threshold[node]
            node = np.where(inner, np.where(go_left, self.left[node], self.right[node]), node)
        return node

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


def best_split(x_sorted: np.ndarray, g_sorted: np.ndarray, h_sorted: np.ndarray,
               reg_lambda: float, min_child_weight: float):
    """Best threshold on one presorted feature: ``(gain_term, position)`` or ``None``.

    ``gain_term`` excludes the parent term; the split sits between positions
    ``k`` and ``k + 1``.
    """
    if len(x_sorted) < 2:
        return None
    GL = np.cumsum(g_sorted)[:-1]
    HL = np.cumsum(h_sorted)[:-1]
    G, H = GL[-1] + g_sorted[-1], HL[-1] + h_sorted[-1]
    GR, HR = G - GL, H - HL
    valid = (x_sorted[1:] > x_sorted[:-1]) & (HL >= min_child_weight) & (HR >= min_child_weight)
    if not valid.any():
        return None
    score = np.where(valid, GL * GL / (HL + reg_lambda) + GR * GR / (HR + reg_lambda), -np.inf)
    top = score.max()
    k = int(np.argmax(score >= top - GAIN_TIE_RTOL * abs(top)))
    return score[k], k


def split_threshold(lo: float, hi: float) -> float:
    mid = 0.5 * (lo + hi)
    return mid if lo < mid <= hi else hi


def fit_tree(grad: np.ndarray, hess: np.ndarray, X: np.ndarray, max_depth: int = 6,
             reg_lambda: float = 1.0, gamma: float = 0.0, min_child_weight: float = 1.0,
             order: np.ndarray | None = None) -> Tree:
    """Greedy exact-split regression tree on gradient/hessian statistics."""
    n, d = X.shape
    if order is None:
        order = np.argsort(X, axis=0, kind="stable").T
    feature, threshold, left, right, value, gains = [], [], [], [], [], []

    def new_node(rows):
        G, H = grad[rows].sum(), hess[rows].sum()
        feature.append(-1)
        threshold.append(0.0)
        left.append(len(feature) - 1)
        right.append(len(feature) - 1)
        value.append(-G / (H + reg_lambda))
        gains.append(0.0)
        return len(feature) - 1, G, H

    root, G0, H0 = new_node(np.arange(n))
    stack = [(root, np.ones(n, dtype=bool), G0, H0, 0)]
    while stack:
        node, member, G, H, depth = stack.pop()
        if depth >= max_depth:
            continue
        parent = G * G / (H + reg_lambda)
        best = None
        for f in range(d):
            idx = order[f][member[order[f]]]
            xs = X[idx, f]
            found = best_split(xs, grad[idx], hess[idx], reg_lambda, min_child_weight)
            if found is None:
                continue
            if best is None or found[0] > best[0] + GAIN_TIE_RTOL * abs(best[0]):
                best = (found[0], f, split_threshold(xs[found[1]], xs[found[1] + 1]))
        if best is None:
            continue
        score, f, thr = best
        gain = 0.5 * (score - parent) - gamma
        if not gain > 0:
            continue
        goes_left = member & (X[:, f] < thr)
        goes_right = member & ~goes_left
        l_node, GL, HL = new_node(np.nonzero(goes_left)[0])
        r_node, GR, HR = new_node(np.nonzero(goes_right)[0])
        feature[node], threshold[node], left[node], right[node], gains[node] = f, thr, l_node, r_node, gain
        stack.append((r_node, goes_right, GR, HR, depth + 1))
        stack.append((l_node, goes_left, GL, HL, depth + 1))
    return Tree(
        np.asarray(feature, dtype=np.int64), np.asarray(threshold, dtype=np.float64),
        np.asarray(left, dtype=np.int64), np.asarray(right, dtype=np.int64),
        np.asarray(value, dtype=np.float64), np.asarray(gains, dtype=np.float64),
    )


def gbt_fit_tree(gradients, hessians, features, depth_limit: int = 6, reg_lambda: float = 1.0, **kw) -> Tree:
    features = np.asarray(features, dtype=np.float64)
    if features.ndim == 1:
        features = features[:, None]
    return fit_tree(np.asarray(gradients, dtype=np.float64), np.asarray(hessians, dtype=np.float64),
                    features, depth_limit, reg_lambda, **kw)


def softmax_grad_hess(margin: np.ndarray, y: np.ndarray):
    p = softmax(margin)
    onehot = np.zeros_like(p)
    onehot[np.arange(len(y)), y] = 1.0
    return p - onehot, np.maximum(2.0 * p * (1.0 - p), HESS_FLOOR)


class GbtModel(Classifier):
    kind = "xgb"
    input_mode = "frame"

    def __init__(self, trees: list[list[Tree]], learning_rate: float, normalizer: NormalizationStats | None = None):
        super().__init__(normalizer)
        self.trees = trees  # trees[round][class]
        self.learning_rate = learning_rate
        self._pack()

    def _pack(self):
        flat = [t for rnd in self.trees for t in rnd]
        offsets = np.cumsum([0] + [t.n_nodes for t in flat])
        self._roots = offsets[:-1]
        self._feature = np.concatenate([t.feature for t in flat]) if flat else np.zeros(0, np.int64)
        self._threshold = np.concatenate([t.threshold for t in flat]) if flat else np.zeros(0)
        self._left = np.concatenate([t.left + o for t, o in zip(flat, offsets)]) if flat else np.zeros(0, np.int64)
        self._right = np.concatenate([t.right + o for t, o in zip(flat, offsets)]) if flat else np.zeros(0, np.int64)
        self._value = np.concatenate([t.value for t in flat]) if flat else np.zeros(0)
        self._depth = max((t.depth for t in flat), default=0)

    def margins(self, Z: np.ndarray) -> np.ndarray:
        """Raw per-class scores; all trees are traversed together, then summed round by round."""
        n = len(Z)
        margin = np.zeros((n, N_CLASSES))
        if not self.trees:
            return margin
        node = np.broadcast_to(self._roots, (n, len(self._roots))).copy()
        rows = np.arange(n)[:, None]
        for _ in range(self._depth):
            f = self._feature[node]
            go_left = Z[rows, np.maximum(f, 0)] < self._threshold[node]
            node = np.where(f >= 0, np.where(go_left, self._left[node], self._right[node]), node)
        leaf = (self.learning_rate * self._value[node]).reshape(n, len(self.trees), N_CLASSES)
        for r in range(len(self.trees)):
            margin += leaf[:, r, :]
        return margin

    def _scores(self, Z):
        return softmax(self.margins(Z))

    def get_state(self):
        meta = {"learning_rate": self.learning_rate, "n_rounds": len(self.trees)}
        arrays = {}
        for r, rnd in enumerate(self.trees):
            for k, t in enumerate(rnd):
                for field in ("feature", "threshold", "left", "right", "value", "gain"):
                    arrays[f"t{r}_{k}_{field}"] = getattr(t, field)
        return meta, arrays

    @classmethod
    def from_state(cls, meta, arrays, normalizer):
        trees = [
            [Tree(*(arrays[f"t{r}_{k}_{f}"] for f in ("feature", "threshold", "left", "right", "value", "gain")))
             for k in range(N_CLASSES)]
            for r in range(meta["n_rounds"])
        ]
        return cls(trees, float(meta["learning_rate"]), normalizer)


def train_gbt(Z: np.ndarray, y: np.ndarray, config: GbtConfig, normalizer) -> GbtModel:
    order = np.argsort(Z, axis=0, kind="stable").T
    margin = np.zeros((len(y), N_CLASSES))
    trees = []
    history = {"loss": [cross_entropy(softmax(margin), y)]}
    for _ in range(config.n_rounds):
        grad, hess = softmax_grad_hess(margin, y)
        rnd = []
        for k in range(N_CLASSES):
            tree = fit_tree(grad[:, k], hess[:, k], Z, config.max_depth, config.reg_lambda,
                            config.gamma_split, config.min_child_weight, order)
            rnd.append(tree)
        for k, tree in enumerate(rnd):
            margin[:, k] += config.learning_rate * tree.predict(Z)
        trees.append(rnd)
        history["loss"].append(cross_entropy(softmax(margin), y))
    model = GbtModel(trees, config.learning_rate, normalizer)
    model.history = history
    return model
