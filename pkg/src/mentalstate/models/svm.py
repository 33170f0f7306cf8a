"""Soft-margin kernel SVM trained by sequential minimal optimization.

The dual is solved in the form

    min_a  1/2 a'Qa - e'a   s.t.  y'a = 0,  0 <= a_i <= C,   Q_ij = y_i y_j K(x_i, x_j)

with maximal-violating-pair / second-order working set selection and a
bounded LRU cache of kernel rows. The decision function is
``f(x) = sum_i a_i y_i K(x_i, x) + b``. Three classes are handled by
one-vs-one voting (default) or one-vs-rest.
"""
from __future__ import annotations

import logging
from collections import OrderedDict
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ..errors import ParameterError
from ..features import N_CLASSES, NormalizationStats
from .base import Classifier
from .config import SvmConfig

log = logging.getLogger(__name__)

TAU = 1e-12


def kernel_matrix(A: np.ndarray, B: np.ndarray, kernel: str, gamma: float, exact: bool = False) -> np.ndarray:
    if exact:
        dot = np.einsum("id,jd->ij", A, B)
    else:
        dot = A @ B.T
    if kernel == "linear":
        return dot
    sq_a = np.einsum("ij,ij->i", A, A)
    sq_b = np.einsum("ij,ij->i", B, B)
    return np.exp(-gamma * np.maximum(sq_a[:, None] + sq_b[None, :] - 2.0 * dot, 0.0))


class KernelRows:
    """Kernel rows ``K(X, x_i)`` computed on demand, keeping the most recent ``max_rows``."""

    def __init__(self, X: np.ndarray, kernel: str, gamma: float, max_rows: int = 4096):
        self.X = X
        self.kernel = kernel
        self.gamma = gamma
        self.max_rows = max(2, max_rows)
        self.sq = np.einsum("ij,ij->i", X, X)
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()
        self.misses = 0

    def diagonal(self) -> np.ndarray:
        return self.sq.copy() if self.kernel == "linear" else np.ones(len(self.X))

    def __call__(self, i: int) -> np.ndarray:
        row = self._rows.get(i)
        if row is not None:
            self._rows.move_to_end(i)
            return row
        self.misses += 1
        dot = self.X @ self.X[i]
        if self.kernel == "linear":
            row = dot
        else:
            row = np.exp(-self.gamma * np.maximum(self.sq + self.sq[i] - 2.0 * dot, 0.0))
        self._rows[i] = row
        if len(self._rows) > self.max_rows:
            self._rows.popitem(last=False)
        return row


@dataclass
class SmoResult:
    alpha: np.ndarray
    b: float
    n_iter: int
    converged: bool


def smo_solve(kernel_row, diag: np.ndarray, y: np.ndarray, C: float, tol: float = 1e-3,
              max_iter: int | None = None) -> SmoResult:
    """Solve the binary dual. ``y`` in {-1, +1}; ``kernel_row(i)`` returns ``K[:, i]``."""
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    if max_iter is None:
        max_iter = max(100_000, 100 * n)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    pos = y > 0
    converged = False
    it = 0
    while it < max_iter:
        yg = -y * grad
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < C))
        if not up.any() or not low.any():
            converged = True
            break
        i = int(np.argmax(np.where(up, yg, -np.inf)))
        m = yg[i]
        if m - np.min(np.where(low, yg, np.inf)) < tol:
            converged = True
            break
        Ki = kernel_row(i)
        cand = low & (yg < m)
        quad = diag[i] + diag - 2.0 * Ki
        quad = np.where(quad > 0, quad, TAU)
        gap = m - yg
        j = int(np.argmin(np.where(cand, -(gap * gap) / quad, np.inf)))
        Kj = kernel_row(j)
        step = gap[j] / quad[j]
        room_i = C - alpha[i] if pos[i] else alpha[i]
        room_j = alpha[j] if pos[j] else C - alpha[j]
        step = min(step, room_i, room_j)
        alpha[i] += y[i] * step
        alpha[j] -= y[j] * step
        for k, room in ((i, room_i), (j, room_j)):
            if step == room or min(alpha[k], C - alpha[k]) < TAU * C:
                alpha[k] = 0.0 if alpha[k] < 0.5 * C else C
        grad += step * y * (Ki - Kj)
        it += 1
    if not converged:
        log.warning("SMO stopped after %d iterations without reaching tol=%g", it, tol)
    yg = -y * grad
    free = (alpha > 0) & (alpha < C)
    if free.any():
        b = float(np.mean(yg[free]))
    else:
        up = (pos & (alpha < C)) | (~pos & (alpha > 0))
        low = (pos & (alpha > 0)) | (~pos & (alpha < C))
        hi = np.max(yg[up]) if up.any() else np.min(yg[low])
        lo = np.min(yg[low]) if low.any() else hi
        b = float((hi + lo) / 2)
    return SmoResult(alpha, b, it, converged)


def kkt_residuals(K: np.ndarray, y: np.ndarray, alpha: np.ndarray, b: float, C: float) -> np.ndarray:
    """Per-point violation of the margin/complementarity conditions."""
    yf = y * (K @ (alpha * y) + b)
    at_zero = alpha <= 0
    at_c = alpha >= C
    free = ~(at_zero | at_c)
    out = np.zeros(len(y))
    out[at_zero] = np.maximum(0.0, 1.0 - yf[at_zero])
    out[at_c] = np.maximum(0.0, yf[at_c] - 1.0)
    out[free] = np.abs(yf[free] - 1.0)
    return out


@dataclass
class BinarySvm:
    support: np.ndarray
    coef: np.ndarray  # alpha_i * y_i for the support vectors
    b: float

    def decision(self, Z: np.ndarray, kernel: str, gamma: float) -> np.ndarray:
        if len(self.coef) == 0:
            return np.full(len(Z), self.b)
        K = kernel_matrix(Z, self.support, kernel, gamma, exact=True)
        return np.einsum("ij,j->i", K, self.coef) + self.b

    def weights(self) -> np.ndarray:
        """Primal normal vector (linear kernel only)."""
        return self.coef @ self.support if len(self.coef) else np.zeros(self.support.shape[1])


def fit_binary(Z: np.ndarray, y: np.ndarray, config: SvmConfig, gamma: float) -> tuple[BinarySvm, SmoResult | None]:
    if np.all(y > 0) or np.all(y < 0):
        return BinarySvm(np.zeros((0, Z.shape[1])), np.zeros(0), float(np.sign(y[0]))), None
    rows = KernelRows(Z, config.kernel, gamma, config.cache_rows)
    res = smo_solve(rows, rows.diagonal(), y, config.C, config.tol, config.max_iter)
    sv = res.alpha > 0
    return BinarySvm(Z[sv], (res.alpha * y)[sv], res.b), res


class SvmModel(Classifier):
    kind = "svm"
    input_mode = "frame"

    def __init__(self, machines: list[tuple[int, int, BinarySvm]], kernel: str, gamma: float,
                 decomposition: str = "ovo", C: float = 0.5, normalizer: NormalizationStats | None = None):
        super().__init__(normalizer)
        self.machines = machines
        self.kernel = kernel
        self.gamma = gamma
        self.decomposition = decomposition
        self.C = C

    def _scores(self, Z):
        n = len(Z)
        scores = np.zeros((n, N_CLASSES))
        if self.decomposition == "ovo":
            for i, j, machine in self.machines:
                first = machine.decision(Z, self.kernel, self.gamma) >= 0
                scores[first, i] += 1.0
                scores[~first, j] += 1.0
        else:
            for k, _, machine in self.machines:
                scores[:, k] = machine.decision(Z, self.kernel, self.gamma)
        return scores

    def get_state(self):
        meta = {
            "kernel": self.kernel,
            "gamma": self.gamma,
            "decomposition": self.decomposition,
            "C": self.C,
            "machines": [[i, j, m.b] for i, j, m in self.machines],
        }
        arrays = {}
        for k, (_, _, m) in enumerate(self.machines):
            arrays[f"m{k}_support"] = m.support
            arrays[f"m{k}_coef"] = m.coef
        return meta, arrays

    @classmethod
    def from_state(cls, meta, arrays, normalizer):
        machines = [
            (int(i), int(j), BinarySvm(arrays[f"m{k}_support"], arrays[f"m{k}_coef"], float(b)))
            for k, (i, j, b) in enumerate(meta["machines"])
        ]
        return cls(machines, meta["kernel"], float(meta["gamma"]), meta["decomposition"], float(meta["C"]), normalizer)


def scale_gamma(Z: np.ndarray) -> float:
    var = Z.var()
    return 1.0 / (Z.shape[1] * var) if var > 0 else 1.0


def train_svm(Z: np.ndarray, y: np.ndarray, config: SvmConfig, normalizer) -> SvmModel:
    gamma = config.gamma if config.gamma is not None else scale_gamma(Z)
    if gamma <= 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    machines = []
    if config.decomposition == "ovo":
        for i, j in combinations(range(N_CLASSES), 2):
            mask = (y == i) | (y == j)
            if not mask.any():
                machines.append((i, j, BinarySvm(np.zeros((0, Z.shape[1])), np.zeros(0), 1.0)))
                continue
            yy = np.where(y[mask] == i, 1.0, -1.0)
            machines.append((i, j, fit_binary(Z[mask], yy, config, gamma)[0]))
    else:
        for k in range(N_CLASSES):
            yy = np.where(y == k, 1.0, -1.0)
            machines.append((k, -1, fit_binary(Z, yy, config, gamma)[0]))
    return SvmModel(machines, config.kernel, gamma, config.decomposition, config.C, normalizer)
