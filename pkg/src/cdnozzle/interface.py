"""Free-boundary solve: locate the contact discontinuity.

The interface curve is updated by a quasi-Newton iteration
g_cd <- g_cd - theta * int M(Q), where Q is the pressure jump across the
interface of the two fixed-interface layer solutions and M is the explicit
inverse of the background pressure-jump derivative.  That derivative
diagonalizes in the quarter-wave basis sin(mu_k y1), mu_k = (2k+1) pi/(2L):
each layer is an anisotropically stretched Laplace problem on a rectangle
of height H = m * sqrt(e1/e2), giving the symbol

    D_k = sqrt(e1+ e2+) coth(mu_k H+) + sqrt(e1- e2-) coth(mu_k H-),

so M maps the sine coefficients q_k of Q to slope coefficients -q_k / D_k
on the cosine side, whose integral is evaluated in closed form.  M is
frozen at the background; continuity of the derivative makes the iteration
contract for small data perturbations.
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import gas as gaslib
from .errors import IterationError
from .fd import apply_d1, edge_derivative
from .layer import FixedPointSettings, LayerData, build_layers, solve_layer
from .norms import weighted_norm_1d


@dataclass(frozen=True)
class InterfaceCurve:
    """Anchored interface curve g_cd (g_cd(0) = 0) with slope samples eta.

    The curve values are the primary unknown of the outer iteration: the
    slope enters the residual only through second-order centered differences
    of g_cd, and slope-space updates are accumulated by exact trapezoid
    integration.  (Carrying eta itself as the unknown would require
    inverting the trapezoid rule, an alternating recursion that pollutes the
    discrete root with a node-scale sawtooth.)
    """

    y1: np.ndarray
    eta: np.ndarray
    g_cd: np.ndarray

    @classmethod
    def from_eta(cls, y1, eta):
        y1 = np.asarray(y1, dtype=float)
        eta = np.asarray(eta, dtype=float)
        return cls(y1=y1, eta=eta, g_cd=_integrate_slope(y1, eta))

    @classmethod
    def from_values(cls, y1, g_cd):
        y1 = np.asarray(y1, dtype=float)
        g_cd = np.asarray(g_cd, dtype=float)
        return cls(y1=y1, eta=apply_d1(g_cd, y1), g_cd=g_cd)

    @property
    def sup_norm(self):
        return float(np.max(np.abs(self.g_cd)))

    def weighted_norm(self, m=2, alpha=0.5, kappa=None):
        kappa = -1.0 - alpha if kappa is None else kappa
        return weighted_norm_1d(self.g_cd, self.y1, m, alpha, kappa)


@dataclass(frozen=True)
class InterfaceResidual:
    """Pressure jump Q(y1) across the interface, from one-sided traces.

    The convergence norm max_norm is taken over the open interval (the
    interface condition holds there); the entrance-corner node carries an
    irreducible O(sigma^2) data-compatibility defect -- at the corner the
    pressures from the two layers are fixed by the entrance data and the
    shared limit slope, and they differ at second order in that slope
    because the layers' quadratic sensitivities differ.  It is reported
    separately as corner_defect.
    """

    y1: np.ndarray
    values: np.ndarray

    @property
    def max_norm(self):
        return float(np.max(np.abs(self.values[1:])))

    @property
    def corner_defect(self):
        return float(abs(self.values[0]))

    def weighted_norm(self, m=1, alpha=0.5, kappa=None):
        kappa = -alpha if kappa is None else kappa
        return weighted_norm_1d(self.values, self.y1, m, alpha, kappa)


def pressure_jump(upper, lower, eta, gamma, npoints=3):
    """Q(y1) = W2(upper traces) - W2(lower traces) on the interface.

    The normal stream-function derivatives are one-sided second-order traces
    into each layer; the tangential derivative on the shared Dirichlet row is
    the slope eta itself.
    """
    q_up = edge_derivative(upper.varphi, upper.grid.y2, axis=1, side="lo",
                           npoints=npoints)
    q_lo = edge_derivative(lower.varphi, lower.grid.y2, axis=1, side="hi",
                           npoints=npoints)
    eta = np.asarray(eta, dtype=float)
    _, w2_up = gaslib.flux_w((eta, q_up), upper.entropy[:, 0],
                             upper.bernoulli[:, 0], gamma)
    _, w2_lo = gaslib.flux_w((eta, q_lo), lower.entropy[:, -1],
                             lower.bernoulli[:, -1], gamma)
    return InterfaceResidual(y1=upper.grid.y1, values=w2_up - w2_lo)


class BackgroundPreconditioner:
    """Explicit inverse of the background interface operator.

    apply(P) solves the stretched-rectangle Laplace problems analytically in
    the quarter-wave sine basis and returns the slope update
    eta(y1) = d/dy1 of the reconstructed interface trace, pinned to
    eta(0) = 0 at the entrance corner.

    The sine analysis is done on a uniform auxiliary grid (where the basis
    is orthogonal and the interpolation matrix has condition number sqrt(2);
    on graded nodes it is numerically singular); the residual is resampled
    there by a cubic spline and the modal solution is evaluated back on the
    solver's own nodes.
    """

    #: hard cap on the analysis mode count (memory/solve-time guard)
    MAX_MODES = 2048

    def __init__(self, y1, length, background, m_plus, m_minus):
        from scipy.interpolate import CubicSpline

        self._spline = CubicSpline
        self.y1 = np.asarray(y1, dtype=float)
        # resolve wavelengths down to the finest graded node spacing: the
        # discrete interface residual carries genuine one-node-scale content
        # near the corners, and modes the basis cannot represent stall the
        # outer iteration far above the target tolerance
        h_min = float(np.min(np.diff(self.y1)))
        n_modes = min(self.MAX_MODES, max(len(self.y1) - 1, int(np.ceil(length / h_min))))
        k = np.arange(n_modes)
        mu = (2.0 * k + 1.0) * np.pi / (2.0 * length)
        up, low = background.upper, background.lower
        h_plus = m_plus * np.sqrt(up.e1 / up.e2)
        h_minus = m_minus * np.sqrt(low.e1 / low.e2)
        self.symbol = (
            np.sqrt(up.e1 * up.e2) / np.tanh(mu * h_plus)
            + np.sqrt(low.e1 * low.e2) / np.tanh(mu * h_minus)
        )
        self._uniform = np.linspace(0.0, length, n_modes + 1)
        sine = np.sin(np.outer(self._uniform[1:], mu))
        self._analysis = sla.lu_factor(sine)
        self._cosine = np.cos(np.outer(self.y1, mu))
        self._sine_over_mu = np.sin(np.outer(self.y1, mu)) / mu[None, :]

    def _coefficients(self, residual_values):
        # invert the open-interval residual: the entrance-corner node carries
        # a data-compatibility defect that is not part of the interface
        # condition and would otherwise leak into the near-corner update
        q = np.array(residual_values, dtype=float)
        q[0] = 0.0
        q_uniform = self._spline(self.y1, q)(self._uniform[1:])
        return sla.lu_solve(self._analysis, q_uniform) / self.symbol

    def apply(self, residual_values):
        eta = -(self._cosine @ self._coefficients(residual_values))
        eta[0] = 0.0
        return eta

    def apply_integrated(self, residual_values):
        """Slope update and its exact integral (the curve update): the
        closed-form integral of the cosine series avoids under-resolving
        node-scale updates with a trapezoid rule on graded nodes."""
        coeffs = self._coefficients(residual_values)
        eta = -(self._cosine @ coeffs)
        eta[0] = 0.0
        g_step = -(self._sine_over_mu @ coeffs)
        return eta, g_step


def background_preconditioner(y1, length, background, m_plus, m_minus):
    return BackgroundPreconditioner(y1, length, background, m_plus, m_minus)


@dataclass
class OuterSettings:
    tol_q_rel: float = 1e-9       # residual tolerance relative to P_b
    max_outer: int = 30
    damping: float = 1.0
    max_backtracks: int = 4
    stagnation_factor: float = 0.95
    stagnation_length: int = 5


@dataclass(frozen=True)
class TwoLayerProblem:
    """Both layer problems plus everything the outer loop needs."""

    upper: LayerData
    lower: LayerData
    background: object
    geometry: object
    boundary: object
    m_plus: float
    m_minus: float
    fixed_point: FixedPointSettings = field(default_factory=FixedPointSettings)

    @property
    def y1(self):
        return self.upper.grid.y1


def build_problem(geometry, boundary, background, n1, n2, grading=1.5,
                  fixed_point=None, mass_slack=None):
    upper, lower, dom = build_layers(
        geometry, boundary, background, n1, n2, grading, mass_slack=mass_slack
    )
    return TwoLayerProblem(
        upper=upper, lower=lower, background=background,
        geometry=geometry, boundary=boundary,
        m_plus=dom.m_plus, m_minus=dom.m_minus,
        fixed_point=fixed_point or FixedPointSettings(),
    )


@dataclass
class FreeBoundaryResult:
    curve: InterfaceCurve
    upper: object
    lower: object
    residual_history: list
    picard_counts: list
    iterations: int
    backtracks: int
    elapsed: float
    converged: bool


def _evaluate(problem, g_values, executor=None):
    """Solve both layers for the given curve values and measure the jump."""
    curve = InterfaceCurve.from_values(problem.y1, g_values)
    if executor is not None:
        f_up = executor.submit(solve_layer, problem.upper, curve.g_cd,
                               problem.fixed_point)
        f_lo = executor.submit(solve_layer, problem.lower, curve.g_cd,
                               problem.fixed_point)
        upper, lower = f_up.result(), f_lo.result()
    else:
        upper = solve_layer(problem.upper, curve.g_cd, problem.fixed_point)
        lower = solve_layer(problem.lower, curve.g_cd, problem.fixed_point)
    residual = pressure_jump(upper, lower, curve.eta, problem.background.gas.gamma)
    return curve, upper, lower, residual


def _integrate_slope(y1, eta):
    panels = 0.5 * (eta[1:] + eta[:-1]) * np.diff(y1)
    return np.concatenate(([0.0], np.cumsum(panels)))


def solve_free_boundary(problem, settings=None, threads=1):
    """Quasi-Newton outer loop with the frozen background inverse."""
    settings = settings or OuterSettings()
    tol = settings.tol_q_rel * problem.background.pressure
    precond = BackgroundPreconditioner(
        problem.y1, problem.geometry.length, problem.background,
        problem.m_plus, problem.m_minus,
    )
    executor = ThreadPoolExecutor(max_workers=2) if threads > 1 else None
    start = time.perf_counter()
    try:
        g_values = np.zeros(len(problem.y1))
        curve, upper, lower, residual = _evaluate(problem, g_values, executor)
        history = [residual.max_norm]
        picard_counts = [(upper.iterations, lower.iterations)]
        backtracks = 0
        while history[-1] > tol:
            if len(history) >= settings.max_outer:
                raise IterationError(
                    f"free-boundary loop not converged in {settings.max_outer} "
                    f"iterations (residual {history[-1]:.3e})", history=history,
                )
            recent = history[-(settings.stagnation_length + 1):]
            if len(recent) == settings.stagnation_length + 1 and all(
                b > settings.stagnation_factor * a for a, b in zip(recent, recent[1:])
            ):
                raise IterationError(
                    "free-boundary residual stagnated "
                    f"(last {settings.stagnation_length} reduction factors > "
                    f"{settings.stagnation_factor})", history=history,
                )
            _, g_step = precond.apply_integrated(residual.values)
            theta = settings.damping
            for attempt in range(settings.max_backtracks + 1):
                trial = _evaluate(problem, g_values - theta * g_step, executor)
                if trial[3].max_norm <= history[-1] or attempt == settings.max_backtracks:
                    break
                theta *= 0.5
                backtracks += 1
            g_values = g_values - theta * g_step
            curve, upper, lower, residual = trial
            history.append(residual.max_norm)
            picard_counts.append((upper.iterations, lower.iterations))
        elapsed = time.perf_counter() - start
        return FreeBoundaryResult(
            curve=curve, upper=upper, lower=lower,
            residual_history=history, picard_counts=picard_counts,
            iterations=len(history), backtracks=backtracks,
            elapsed=elapsed, converged=True,
        )
    finally:
        if executor is not None:
            executor.shutdown(wait=False)
