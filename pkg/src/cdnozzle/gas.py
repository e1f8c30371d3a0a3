"""Polytropic-gas thermodynamics and the subsonic density closure.

In Lagrangian (mass) coordinates the stream function satisfies
``d(phi)/dy1 = u2/u1`` and ``d(phi)/dy2 = 1/(rho*u1)``.  Writing
``p = d(phi)/dy1`` and ``q = d(phi)/dy2``, the Bernoulli relation becomes an
algebraic equation for the density,

    M(rho) = (1 + p^2)/(2 q^2) + A*gamma*rho^(gamma+1)/(gamma-1) - B*rho^2 = 0,

whose largest root is the subsonic one (dM/drho = rho*(c^2 - |u|^2) > 0
there).  All functions below are vectorized over numpy arrays.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ClosureError

#: relative subsonic margin: reject states with c^2 - |u|^2 < margin * c^2
NEAR_SONIC_MARGIN = 1e-6

#: absolute tolerance on the closure function M for the density Newton solve
CLOSURE_TOL = 1e-13
CLOSURE_MAX_ITER = 50


@dataclass(frozen=True)
class GasConstants:
    """Adiabatic exponent and the entropy scale R in A(S) = R*exp(S)."""

    gamma: float
    r_gas: float = 1.0

    def __post_init__(self):
        if not self.gamma > 1.0:
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")
        if not self.r_gas > 0.0:
            raise ValueError(f"r_gas must be positive, got {self.r_gas}")

    def entropy_of(self, a):
        """Entropy S for a given entropy function value A = R*exp(S)."""
        return np.log(np.asarray(a, dtype=float) / self.r_gas)


@dataclass(frozen=True)
class ThermoState:
    """One thermodynamic state (rho, u1, u2, P) with derived transport quantities."""

    rho: float
    u1: float
    u2: float
    pressure: float
    gamma: float

    def __post_init__(self):
        if self.rho <= 0.0 or self.pressure <= 0.0:
            raise ValueError("density and pressure must be positive")

    @property
    def entropy_a(self):
        return self.pressure / self.rho**self.gamma

    @property
    def bernoulli_b(self):
        kinetic = 0.5 * (self.u1**2 + self.u2**2)
        return kinetic + self.gamma * self.pressure / ((self.gamma - 1.0) * self.rho)

    @property
    def mass_flux_j(self):
        return self.rho * self.u1

    @property
    def sound_speed_squared(self):
        return sound_speed_sq(self.rho, self.entropy_a, self.gamma)

    @property
    def mach(self):
        return np.sqrt((self.u1**2 + self.u2**2) / self.sound_speed_squared)

    @property
    def is_subsonic(self):
        return self.u1**2 + self.u2**2 < self.sound_speed_squared

    def stream_gradient(self):
        """(p, q) = (u2/u1, 1/(rho*u1)) of this state."""
        if self.u1 == 0.0:
            raise ValueError("stream gradient undefined for u1 = 0")
        return self.u2 / self.u1, 1.0 / (self.rho * self.u1)


def _check_positive(**kwargs):
    for name, value in kwargs.items():
        arr = np.asarray(value)
        if np.any(~np.isfinite(arr)) or np.any(arr <= 0.0):
            raise ValueError(f"{name} must be positive and finite")


def sound_speed_sq(rho, a, gamma):
    """Squared sonic speed c^2 = A*gamma*rho^(gamma-1)."""
    _check_positive(rho=rho, a=a)
    rho = np.asarray(rho, dtype=float)
    a = np.asarray(a, dtype=float)
    return a * gamma * rho ** (gamma - 1.0)


def stagnation_density(a, b, gamma):
    """Density at which the flow speed vanishes on the (A, B) isentrope."""
    _check_positive(a=a, b=b)
    return ((gamma - 1.0) * np.asarray(b, float) / (np.asarray(a, float) * gamma)) ** (
        1.0 / (gamma - 1.0)
    )


def sonic_density(grad_phi, a, gamma):
    """Density at which |u| = c for a fixed stream gradient (p, q)."""
    p, q = (np.asarray(g, dtype=float) for g in grad_phi)
    _check_positive(a=a, q=q)
    a = np.asarray(a, dtype=float)
    return ((1.0 + p**2) / (a * gamma * q**2)) ** (1.0 / (gamma + 1.0))


def closure_function(rho, grad_phi, a, b, gamma):
    """The Bernoulli misfit M(rho); its subsonic root defines the density."""
    p, q = (np.asarray(g, dtype=float) for g in grad_phi)
    rho = np.asarray(rho, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return (
        (1.0 + p**2) / (2.0 * q**2)
        + a * gamma * rho ** (gamma + 1.0) / (gamma - 1.0)
        - b * rho**2
    )


def speed_sq_from_stream(rho, grad_phi):
    """|u|^2 = (1 + p^2)/(rho*q)^2."""
    p, q = (np.asarray(g, dtype=float) for g in grad_phi)
    rho = np.asarray(rho, dtype=float)
    return (1.0 + p**2) / (rho * q) ** 2


def density_from_stream(grad_phi, a, b, gamma, tol=CLOSURE_TOL,
                        max_iter=CLOSURE_MAX_ITER, sonic_margin=NEAR_SONIC_MARGIN):
    """Subsonic density root of the Bernoulli closure.

    Safeguarded Newton on M(rho) = 0 over [rho_sonic, rho_stagnation]; M is
    strictly increasing there, so the bracket pins the unique subsonic root.

    Raises
    ------
    ValueError
        for non-positive q, a or b (domain error).
    ClosureError
        when no subsonic root exists (M(rho_sonic) >= 0) or the root violates
        the near-sonic guard c^2 - |u|^2 >= sonic_margin * c^2.
    """
    p, q = (np.asarray(g, dtype=float) for g in grad_phi)
    _check_positive(q=q, a=a, b=b)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    p, q, a, b = np.broadcast_arrays(p, q, a, b)

    lo = sonic_density((p, q), a, gamma)
    hi = stagnation_density(a, b, gamma)

    m_lo = closure_function(lo, (p, q), a, b, gamma)
    if np.any(m_lo >= 0.0):
        worst = float(np.max(m_lo))
        raise ClosureError(
            "no subsonic density root (sonic residual "
            f"{worst:.3e} >= 0); data too far from background",
            sonic_residual=worst,
        )

    lo = lo.copy()
    hi = hi.copy()
    rho = 0.5 * (lo + hi)
    for _ in range(max_iter):
        m = closure_function(rho, (p, q), a, b, gamma)
        if np.all(np.abs(m) <= tol):
            break
        # keep the bracket: M(lo) < 0 < M(hi)
        lo = np.where(m < 0.0, rho, lo)
        hi = np.where(m > 0.0, rho, hi)
        dm = rho * (sound_speed_sq(rho, a, gamma) - speed_sq_from_stream(rho, (p, q)))
        step = np.divide(m, dm, out=np.zeros_like(m), where=dm > 0.0)
        candidate = rho - step
        inside = (candidate > lo) & (candidate < hi)
        rho = np.where(inside & (dm > 0.0), candidate, 0.5 * (lo + hi))
    else:
        m = closure_function(rho, (p, q), a, b, gamma)
        if np.any(np.abs(m) > tol):
            raise ClosureError(
                f"density Newton did not reach |M| <= {tol:g} "
                f"(max |M| = {float(np.max(np.abs(m))):.3e})"
            )

    c2 = sound_speed_sq(rho, a, gamma)
    margin = c2 - speed_sq_from_stream(rho, (p, q))
    if np.any(margin < sonic_margin * c2):
        raise ClosureError(
            "near-sonic state rejected: c^2 - |u|^2 < "
            f"{sonic_margin:g} * c^2 (min margin {float(np.min(margin)):.3e})"
        )
    if rho.ndim == 0:
        return float(rho)
    return rho


def density_sensitivities(grad_phi, a, b, gamma, rho=None):
    """Closed-form derivatives of the subsonic density root.

    Returns (d rho/dp, d rho/dq, d rho/dA, d rho/dB) with p, q the stream
    gradient components, evaluated at the subsonic root.
    """
    p, q = (np.asarray(g, dtype=float) for g in grad_phi)
    if rho is None:
        rho = density_from_stream(grad_phi, a, b, gamma)
    rho = np.asarray(rho, dtype=float)
    a = np.asarray(a, dtype=float)
    c2 = sound_speed_sq(rho, a, gamma)
    denom = c2 - (1.0 + p**2) / (rho * q) ** 2
    d_p = -p / (rho * q**2 * denom)
    d_q = (1.0 + p**2) / (rho * q**3 * denom)
    d_a = -gamma * rho**gamma / ((gamma - 1.0) * denom)
    d_b = rho / denom
    return d_p, d_q, d_a, d_b


def velocity_from_stream(rho, grad_phi):
    """(u1, u2) = (1/(rho*q), p/(rho*q))."""
    p, q = (np.asarray(g, dtype=float) for g in grad_phi)
    rho = np.asarray(rho, dtype=float)
    u1 = 1.0 / (rho * q)
    return u1, p * u1


def flux_w(grad_phi, a, b, gamma, rho=None):
    """Nonlinear fluxes (W1, W2) = (u2, P) of the reduced second-order equation."""
    if rho is None:
        rho = density_from_stream(grad_phi, a, b, gamma)
    rho = np.asarray(rho, dtype=float)
    a = np.asarray(a, dtype=float)
    _, u2 = velocity_from_stream(rho, grad_phi)
    return u2, a * rho ** np.asarray(gamma, dtype=float)


def flux_w_gradients(grad_phi, a, b, gamma, rho=None):
    """Derivatives of (W1, W2) with respect to (p, q) at the subsonic root.

    Returns (dW1/dp, dW1/dq, dW2/dp, dW2/dq); the off-diagonal pair is equal,
    which makes the frozen-coefficient operator symmetric.
    """
    p, q = (np.asarray(g, dtype=float) for g in grad_phi)
    if rho is None:
        rho = density_from_stream(grad_phi, a, b, gamma)
    rho = np.asarray(rho, dtype=float)
    a = np.asarray(a, dtype=float)
    c2 = sound_speed_sq(rho, a, gamma)
    u1, u2 = velocity_from_stream(rho, (p, q))
    speed2 = u1**2 + u2**2
    denom = c2 - speed2
    w1_p = u1 * (c2 - u1**2) / denom
    w1_q = -p * c2 / (rho * q**2 * denom)
    w2_q = c2 * speed2 * rho**2 * u1 / denom
    return w1_p, w1_q, w1_q, w2_q


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)
_GL_S = 0.5 * (_GL_NODES + 1.0)
_GL_W = 0.5 * _GL_WEIGHTS


def coeff_a(grad_phi_b, grad_phi_bar, a, b, gamma):
    """Frozen-coefficient matrix a_ij for the linearized divergence-form equation.

    a_ij = int_0^1 dW_i/d(p,q) evaluated along the segment
    grad_phi_b + s * grad_phi_bar, s in [0, 1], by 16-point Gauss-Legendre.
    A sonic crossing anywhere on the segment raises ClosureError.

    Returns (a11, a12, a21, a22) broadcast to the input shape.
    """
    pb, qb = (np.asarray(g, dtype=float) for g in grad_phi_b)
    pp, qq = (np.asarray(g, dtype=float) for g in grad_phi_bar)
    pb, qb, pp, qq = np.broadcast_arrays(pb, qb, pp, qq)
    a11 = np.zeros(pb.shape)
    a12 = np.zeros(pb.shape)
    a22 = np.zeros(pb.shape)
    for s, w in zip(_GL_S, _GL_W):
        g1 = pb + s * pp
        g2 = qb + s * qq
        w1p, w1q, _, w2q = flux_w_gradients((g1, g2), a, b, gamma)
        a11 += w * w1p
        a12 += w * w1q
        a22 += w * w2q
    if a11.ndim == 0:
        return float(a11), float(a12), float(a12), float(a22)
    return a11, a12, a12.copy(), a22


def ellipticity_min_eigenvalue(a11, a12, a22):
    """Smallest eigenvalue of the symmetrized coefficient matrix."""
    a11 = np.asarray(a11, dtype=float)
    a12 = np.asarray(a12, dtype=float)
    a22 = np.asarray(a22, dtype=float)
    half_trace = 0.5 * (a11 + a22)
    radius = np.sqrt(0.25 * (a11 - a22) ** 2 + a12**2)
    return half_trace - radius
