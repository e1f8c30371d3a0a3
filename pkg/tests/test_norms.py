import numpy as np
import pytest

from cdnozzle import norms
from cdnozzle.elliptic import tanh_nodes

ALPHA = 0.5
KAPPA = -1.0 - ALPHA


def test_weighted_norm_constant():
    x = np.linspace(0.0, 1.0, 41)
    c = 0.73
    assert norms.weighted_norm_1d(np.full(41, c), x, 2, ALPHA, KAPPA) == pytest.approx(c, abs=1e-12)


def test_weighted_norm_linear_first_seminorm():
    # f = y2 on the unit square: the |beta| = 1 term carries weight
    # delta^max(1+kappa, 0) = 1 and contributes exactly 1
    y1 = np.linspace(0.0, 1.0, 33)
    y2 = np.linspace(0.0, 1.0, 33)
    f = np.broadcast_to(y2[None, :], (33, 33))
    total = norms.weighted_norm_2d(f, y1, y2, 1, ALPHA, KAPPA)
    # k=0 term sup|f| = 1, k=1 term sup|grad f| = 1, Hoelder term 0
    assert total == pytest.approx(2.0, abs=1e-10)


def test_weighted_norm_detects_corner_class():
    # f = y2^(1+alpha): finite weighted 2,alpha norm, divergent plain C^2 norm
    weighted, plain = [], []
    for n in (33, 65, 129):
        y1 = np.linspace(0.0, 1.0, n)
        y2 = tanh_nodes(n, 0.0, 1.0, 1.5)
        f = np.broadcast_to((y2 ** (1.0 + ALPHA))[None, :], (n, n))
        weighted.append(norms.weighted_norm_2d(f, y1, y2, 2, ALPHA, KAPPA))
        d2 = np.gradient(np.gradient(f[0], y2), y2)
        plain.append(np.max(np.abs(d2)))
    assert weighted[-1] <= 1.5 * weighted[0] + 1.0   # stays bounded
    # d2(y^(3/2)) ~ y^(-1/2): the plain norm grows like h_edge^(-1/2)
    assert np.all(np.diff(plain) > 0.0)
    assert plain[-1] > 1.9 * plain[0]


def test_holder_norm_polynomial():
    # f(x) = x^2 on [0,1]: sup|f| = 1, sup|f'| = 2, [f']_alpha = 2
    x = np.linspace(0.0, 1.0, 257)
    val = norms.holder_norm_1d([x**2, 2.0 * x], x, ALPHA)
    assert val == pytest.approx(1.0 + 2.0 + 2.0, rel=1e-2)


def test_weighted_norm_1d_interface_curve():
    x = np.linspace(0.0, 1.0, 65)
    g = x * (1.0 - x)
    val = norms.weighted_norm_1d(g, x, 2, ALPHA, KAPPA)
    assert np.isfinite(val) and val > 0.0
