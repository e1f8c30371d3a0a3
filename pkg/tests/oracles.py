"""Independent oracles and measurement helpers shared by the test suite."""

import numpy as np

from cdnozzle import gas


def density_bisection(grad_phi, a, b, gamma, iters=200):
    """Pure-bisection subsonic density root, independent of the Newton path."""
    p, q = grad_phi
    lo = ((1.0 + p**2) / (a * gamma * q**2)) ** (1.0 / (gamma + 1.0))
    hi = ((gamma - 1.0) * b / (a * gamma)) ** (1.0 / (gamma - 1.0))

    def misfit(rho):
        return (
            (1.0 + p**2) / (2.0 * q**2)
            + a * gamma * rho ** (gamma + 1.0) / (gamma - 1.0)
            - b * rho**2
        )

    assert misfit(lo) < 0.0 < misfit(hi), "no subsonic bracket"
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if misfit(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def coeff_a_quadrature_oracle(grad_phi_b, grad_phi_bar, a, b, gamma, n=16):
    """Gauss-Legendre quadrature of the chain-rule integrand built from the
    printed density sensitivities (compositional path, not the closed forms)."""
    nodes, weights = np.polynomial.legendre.leggauss(n)
    s_vals = 0.5 * (nodes + 1.0)
    w_vals = 0.5 * weights
    pb, qb = grad_phi_b
    pp, qq = grad_phi_bar
    a11 = a12 = a21 = a22 = 0.0
    for s, w in zip(s_vals, w_vals):
        p = pb + s * pp
        q = qb + s * qq
        rho = gas.density_from_stream((p, q), a, b, gamma)
        d_p, d_q, _, _ = gas.density_sensitivities((p, q), a, b, gamma, rho=rho)
        # W1 = p/(rho*q), W2 = A*rho^gamma, differentiated through rho(p, q)
        dw1_dp = 1.0 / (rho * q) - p * d_p / (rho**2 * q)
        dw1_dq = -p / (rho * q**2) - p * d_q / (rho**2 * q)
        dw2_dp = a * gamma * rho ** (gamma - 1.0) * d_p
        dw2_dq = a * gamma * rho ** (gamma - 1.0) * d_q
        a11 += w * dw1_dp
        a12 += w * dw1_dq
        a21 += w * dw2_dp
        a22 += w * dw2_dq
    return a11, a12, a21, a22


def random_subsonic_states(rng, n, gamma=1.4, margin=0.3):
    """Sample (p, q, a, b) tuples with a comfortable subsonic margin."""
    states = []
    while len(states) < n:
        rho = rng.uniform(0.5, 1.5)
        u1 = rng.uniform(0.15, 0.9)
        u2 = rng.uniform(-0.3, 0.3)
        pressure = rng.uniform(0.6, 1.6)
        a = pressure / rho**gamma
        c2 = a * gamma * rho ** (gamma - 1.0)
        if u1**2 + u2**2 >= (1.0 - margin) * c2:
            continue
        b = 0.5 * (u1**2 + u2**2) + gamma * pressure / ((gamma - 1.0) * rho)
        states.append((u2 / u1, 1.0 / (rho * u1), a, b, rho))
    return states


def fit_order(hs, errors):
    """Least-squares convergence order from mesh sizes and error norms."""
    hs = np.asarray(hs, dtype=float)
    errors = np.asarray(errors, dtype=float)
    mask = errors > 0.0
    if mask.sum() < 2:
        return np.inf
    slope, _ = np.polyfit(np.log(hs[mask]), np.log(errors[mask]), 1)
    return slope
