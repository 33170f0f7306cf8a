"""Independent reference computations used as test oracles."""
import numpy as np


def numerical_gradient(f, params, names=None, eps=1e-5, coords=None, rng=None):
    """Central differences of scalar ``f()`` w.r.t. arrays in ``params`` (perturbed in place).

    ``coords`` limits each array to that many randomly chosen entries.
    Returns ``{name: (flat_indices, values)}``.
    """
    out = {}
    for name in names or list(params):
        arr = params[name]
        flat = arr.reshape(-1)
        idx = np.arange(flat.size)
        if coords is not None and flat.size > coords:
            idx = np.sort(rng.choice(flat.size, coords, replace=False))
        vals = np.empty(len(idx))
        for j, k in enumerate(idx):
            orig = flat[k]
            flat[k] = orig + eps
            up = f()
            flat[k] = orig - eps
            down = f()
            flat[k] = orig
            vals[j] = (up - down) / (2 * eps)
        out[name] = (idx, vals)
    return out


def max_relative_error(analytic, numeric, floor=1e-6):
    analytic, numeric = np.asarray(analytic), np.asarray(numeric)
    return float(np.max(np.abs(analytic - numeric) / np.maximum(np.abs(analytic) + np.abs(numeric), floor)))


def brute_force_split(x, g, h, reg_lambda=1.0, gamma=0.0, min_child_weight=1.0):
    """Exhaustive search over every feature and every midpoint threshold.

    Returns ``(gain, feature, threshold)`` or ``None`` when nothing has positive gain.
    """
    G, H = g.sum(), h.sum()
    parent = G * G / (H + reg_lambda)
    best = None
    for f in range(x.shape[1]):
        values = np.unique(x[:, f])
        for lo, hi in zip(values[:-1], values[1:]):
            thr = (lo + hi) / 2
            left = x[:, f] < thr
            GL, HL = g[left].sum(), h[left].sum()
            GR, HR = G - GL, H - HL
            if HL < min_child_weight or HR < min_child_weight:
                continue
            score = GL * GL / (HL + reg_lambda) + GR * GR / (HR + reg_lambda)
            # near-equal scores are ties; the first (lowest feature, lowest threshold) wins
            if best is None or score > best[0] + 1e-12 * abs(best[0]):
                best = (score, f, thr)
    if best is None:
        return None
    gain = 0.5 * (best[0] - parent) - gamma
    return (gain, best[1], best[2]) if gain > 0 else None
    return best


def brute_force_tree(x, g, h, depth, reg_lambda=1.0, min_child_weight=1.0):
    """Nested dict tree grown by exhaustive search: leaves ``{"value": v}``."""
    leaf = {"value": -g.sum() / (h.sum() + reg_lambda)}
    if depth == 0:
        return leaf
    found = brute_force_split(x, g, h, reg_lambda, 0.0, min_child_weight)
    if found is None:
        return leaf
    _, f, thr = found
    left = x[:, f] < thr
    return {
        "feature": f,
        "threshold": thr,
        "left": brute_force_tree(x[left], g[left], h[left], depth - 1, reg_lambda, min_child_weight),
        "right": brute_force_tree(x[~left], g[~left], h[~left], depth - 1, reg_lambda, min_child_weight),
    }
