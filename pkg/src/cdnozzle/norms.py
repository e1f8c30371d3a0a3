"""Discrete Hoelder norms: plain C^{m,alpha} for 1-D data and the weighted
interior norms used to measure stream-function perturbations and the
interface curve.

The weighted seminorms weight k-th derivatives by delta^max(k+kappa, 0) and
the top Hoelder quotient by delta^max(m+alpha+kappa, 0), where delta is the
distance to the two y2-edges of a layer rectangle (or to the endpoints of an
interval).  kappa = -1-alpha reproduces the corner-permissive norm the
estimates are stated in.
"""

import numpy as np

from .fd import apply_d1

#: Hoelder quotients are sampled only over node pairs closer than this
#: fraction of the y1-extent; far pairs are dominated by near ones.
PAIR_WINDOW_FRACTION = 0.25


def holder_norm_1d(derivs, x, alpha):
    """Unweighted C^{m,alpha} norm from sampled exact derivatives.

    derivs is the list [f, f', ..., f^(m)] sampled at nodes x.
    """
    x = np.asarray(x, dtype=float)
    total = 0.0
    for d in derivs:
        total += float(np.max(np.abs(d)))
    top = np.asarray(derivs[-1], dtype=float)
    diff = np.abs(top[:, None] - top[None, :])
    dist = np.abs(x[:, None] - x[None, :])
    mask = dist > 0.0
    quotient = np.zeros_like(diff)
    quotient[mask] = diff[mask] / dist[mask] ** alpha
    total += float(np.max(quotient))
    return total


def _pair_seminorm_1d(values, x, weight_exp, alpha, delta, window):
    diff = np.abs(values[:, None] - values[None, :])
    dist = np.abs(x[:, None] - x[None, :])
    mask = (dist > 0.0) & (dist <= window)
    if not np.any(mask):
        return 0.0
    pair_delta = np.minimum(delta[:, None], delta[None, :])
    weight = pair_delta**weight_exp if weight_exp > 0.0 else np.ones_like(pair_delta)
    quotient = np.where(mask, weight * diff / np.where(mask, dist, 1.0) ** alpha, 0.0)
    return float(np.max(quotient))


def weighted_norm_1d(values, x, m, alpha, kappa, window_fraction=PAIR_WINDOW_FRACTION):
    """Discrete weighted norm of a function sampled on an interval.

    delta is the distance to the interval endpoints; derivatives are taken by
    second-order finite differences.
    """
    x = np.asarray(x, dtype=float)
    values = np.asarray(values, dtype=float)
    delta = np.minimum(x - x[0], x[-1] - x)
    window = window_fraction * (x[-1] - x[0])
    total = 0.0
    d = values
    for k in range(m + 1):
        exp = max(k + kappa, 0.0)
        weight = delta**exp if exp > 0.0 else np.ones_like(delta)
        total += float(np.max(weight * np.abs(d)))
        if k < m:
            d = apply_d1(d, x)
    total += _pair_seminorm_1d(d, x, max(m + alpha + kappa, 0.0), alpha, delta, window)
    return total


def _derivative_stack_2d(values, y1, y2, m):
    """All D^beta for |beta| = 0..m (second-order differences)."""
    stacks = [{(0, 0): np.asarray(values, dtype=float)}]
    for k in range(1, m + 1):
        level = {}
        for (b1, b2), v in stacks[-1].items():
            level[(b1 + 1, b2)] = apply_d1(v, y1, axis=0)
            if b1 == 0:
                level[(b1, b2 + 1)] = apply_d1(v, y2, axis=1)
        stacks.append(level)
    return stacks


def weighted_norm_2d(values, y1, y2, m, alpha, kappa,
                     window_fraction=PAIR_WINDOW_FRACTION):
    """Discrete weighted norm on a layer rectangle.

    delta is the distance to the two y2-edges (the interface and the wall),
    matching the function class the layer estimates are stated in.
    """
    y1 = np.asarray(y1, dtype=float)
    y2 = np.asarray(y2, dtype=float)
    delta = np.minimum(y2 - y2[0], y2[-1] - y2)[None, :] * np.ones((len(y1), 1))
    window = window_fraction * (y1[-1] - y1[0])
    stacks = _derivative_stack_2d(values, y1, y2, m)
    total = 0.0
    for k, level in enumerate(stacks):
        exp = max(k + kappa, 0.0)
        weight = delta**exp if exp > 0.0 else np.ones_like(delta)
        total += max(float(np.max(weight * np.abs(v))) for v in level.values())
    total += _holder_seminorm_2d(stacks[m], y1, y2, delta,
                                 max(m + alpha + kappa, 0.0), alpha, window)
    return total


def _holder_seminorm_2d(top_level, y1, y2, delta, weight_exp, alpha, window):
    n1, n2 = len(y1), len(y2)
    best = 0.0
    fields = list(top_level.values())
    h1_min = float(np.min(np.diff(y1)))
    h2_min = float(np.min(np.diff(y2)))
    max_di = min(n1 - 1, max(1, int(window / max(h1_min, 1e-300))))
    max_dj = min(n2 - 1, max(1, int(window / max(h2_min, 1e-300))))
    for di in range(0, max_di + 1):
        for dj in range(-max_dj, max_dj + 1):
            if di == 0 and dj <= 0:
                continue
            i_lo = slice(0, n1 - di)
            i_hi = slice(di, n1)
            if dj >= 0:
                j_lo, j_hi = slice(0, n2 - dj), slice(dj, n2)
            else:
                j_lo, j_hi = slice(-dj, n2), slice(0, n2 + dj)
            dist = np.hypot(
                (y1[i_hi] - y1[i_lo])[:, None], (y2[j_hi] - y2[j_lo])[None, :]
            )
            mask = (dist > 0.0) & (dist <= window)
            if not np.any(mask):
                continue
            pair_delta = np.minimum(delta[i_lo, j_lo], delta[i_hi, j_hi])
            weight = pair_delta**weight_exp if weight_exp > 0.0 else 1.0
            denom = np.where(mask, dist, 1.0) ** alpha
            for v in fields:
                diff = np.abs(v[i_hi, j_hi] - v[i_lo, j_lo])
                quot = np.where(mask, weight * diff / denom, 0.0)
                best = max(best, float(np.max(quot)))
    return best
