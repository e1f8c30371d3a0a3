"""Nonuniform finite-difference helpers (3- and 4-point stencils)."""

import numpy as np


def deriv_weights(xs, x_eval):
    """Derivative weights at x_eval for a polynomial fit through nodes xs."""
    xs = np.asarray(xs, dtype=float)
    n = len(xs)
    # Vandermonde in (x - x_eval); derivative picks the linear coefficient
    v = np.vander(xs - x_eval, n, increasing=True)
    rhs = np.zeros(n)
    rhs[1] = 1.0
    return np.linalg.solve(v.T, rhs)


def value_weights(xs, x_eval):
    """Lagrange interpolation/extrapolation weights at x_eval for nodes xs."""
    xs = np.asarray(xs, dtype=float)
    n = len(xs)
    v = np.vander(xs - x_eval, n, increasing=True)
    rhs = np.zeros(n)
    rhs[0] = 1.0
    return np.linalg.solve(v.T, rhs)


def centered_d1_coeffs(x):
    """Per-node 3-point first-derivative coefficients on a nonuniform grid.

    Returns (w_minus, w_zero, w_plus) of length n.  Interior rows are centered;
    the end rows are one-sided second order (referencing the first or last
    three nodes, stored so that w_minus/w_zero/w_plus always multiply
    f[i-1], f[i], f[i+1] for interior i and the proper one-sided triple at
    the ends -- end rows are handled separately by apply_d1).
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    wm = np.zeros(n)
    w0 = np.zeros(n)
    wp = np.zeros(n)
    ha = x[1:-1] - x[:-2]
    hb = x[2:] - x[1:-1]
    wm[1:-1] = -hb / (ha * (ha + hb))
    wp[1:-1] = ha / (hb * (ha + hb))
    w0[1:-1] = -(wm[1:-1] + wp[1:-1])
    return wm, w0, wp


def apply_d1(values, x, axis=0):
    """Second-order first derivative of sampled values along one axis."""
    values = np.asarray(values, dtype=float)
    x = np.asarray(x, dtype=float)
    v = np.moveaxis(values, axis, 0)
    out = np.empty_like(v)
    wm, w0, wp = centered_d1_coeffs(x)
    shape = (-1,) + (1,) * (v.ndim - 1)
    out[1:-1] = (
        wm[1:-1].reshape(shape) * v[:-2]
        + w0[1:-1].reshape(shape) * v[1:-1]
        + wp[1:-1].reshape(shape) * v[2:]
    )
    w_lo = deriv_weights(x[:3], x[0])
    w_hi = deriv_weights(x[-3:], x[-1])
    out[0] = w_lo[0] * v[0] + w_lo[1] * v[1] + w_lo[2] * v[2]
    out[-1] = w_hi[0] * v[-3] + w_hi[1] * v[-2] + w_hi[2] * v[-1]
    return np.moveaxis(out, 0, axis)


def edge_derivative(values, x, axis, side, npoints=3):
    """One-sided derivative at an edge of a sampled field.

    side is "lo" or "hi"; npoints = 3 gives the second-order trace, 4 the
    third-order one.  Returns the derivative along `axis` evaluated at the
    first/last node, as an array over the remaining axes.
    """
    values = np.moveaxis(np.asarray(values, dtype=float), axis, 0)
    x = np.asarray(x, dtype=float)
    if side == "lo":
        nodes, block = x[:npoints], values[:npoints]
        at = x[0]
    elif side == "hi":
        nodes, block = x[-npoints:], values[-npoints:]
        at = x[-1]
    else:
        raise ValueError(f"side must be 'lo' or 'hi', got {side!r}")
    w = deriv_weights(nodes, at)
    return np.tensordot(w, block, axes=(0, 0))
