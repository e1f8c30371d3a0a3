"""Per-layer nonlinear solve for a fixed interface curve.

The stream-function perturbation phi = varphi - varphi_b satisfies a
nonlinear divergence-form equation whose frozen-coefficient linearization is
solved repeatedly (Picard / successive substitution), with the nonlinear
exit condition evaluated at the previous iterate.  The physically relevant
identity varphi(y1, y2) = x2 makes the wall Dirichlet data carry the wall
shapes and the interface row carry g_cd.
"""

from dataclasses import dataclass, field

import numpy as np

from . import gas as gaslib
from .elliptic import (
    CoefficientField,
    LayerGrid,
    MixedBvpSpec,
    assemble,
    solve,
    tanh_nodes,
)
from .errors import ConsistencyError, ExitRangeError, IterationError
from .fd import apply_d1
from .problem import build_lagrangian_domain, mass_fluxes

#: iterate-runaway guard relative to the first nonzero update
RUNAWAY_FACTOR = 10.0


@dataclass(frozen=True)
class LayerData:
    """Frozen ingredients of one layer's fixed-interface problem."""

    sign: int                  # +1 upper layer, -1 lower layer
    grid: LayerGrid
    gas: object
    background: object         # LayerBackground
    entrance: object           # LagrangianEntrance (tables at y2 nodes)
    g2: np.ndarray             # wall Dirichlet data (perturbation), y1 nodes
    f2: np.ndarray             # source samples at y2 nodes (f1 is identically 0)
    omega_exit: object         # callable flow-angle polynomial of x2
    exit_span: tuple           # admissible x2 range at the exit

    @property
    def phi_b_slope(self):
        return 1.0 / self.background.mass_flux

    def phi_background(self):
        return np.broadcast_to(self.grid.y2[None, :] * self.phi_b_slope, self.grid.shape)

    @property
    def interface_side(self):
        return "bottom" if self.sign > 0 else "top"


@dataclass
class FixedPointSettings:
    # the default update tolerance sits two decades below the outer
    # pressure-jump tolerance: trace differencing amplifies the layer
    # fixed-point error by ~1/h, and the outer loop must reach 1e-9*P_b
    tol_update: float = 1e-12
    max_iters: int = 60
    damping: float = 1.0

    def __post_init__(self):
        if not self.tol_update > 0.0:
            raise ValueError("tol_update must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if not 0.0 < self.damping <= 1.0:
            raise ValueError("picard damping must lie in (0, 1]")


@dataclass
class StreamField:
    """Converged layer solution with reconstructed primitive fields."""

    sign: int
    grid: LayerGrid
    gamma: float
    phi: np.ndarray            # perturbation from the background stream
    varphi: np.ndarray         # full stream function (equals x2 pointwise)
    rho: np.ndarray
    u1: np.ndarray
    u2: np.ndarray
    pressure: np.ndarray
    entropy: np.ndarray        # A(y2) tiled along y1
    bernoulli: np.ndarray      # B(y2) tiled along y1
    mach: np.ndarray
    iterations: int = 0
    update_norms: list = field(default_factory=list)

    @property
    def contraction_factors(self):
        u = self.update_norms
        return [u[k + 1] / u[k] for k in range(len(u) - 1) if u[k] > 0.0]


def build_layers(geometry, boundary, background, n1, n2, grading=1.5,
                 mass_slack=None):
    """Assemble LayerData for both layers on fresh corner-graded grids."""
    m_minus, m_plus = mass_fluxes(boundary)
    dom = build_lagrangian_domain(
        boundary, background,
        tanh_nodes(n2, 0.0, m_plus, grading),
        tanh_nodes(n2, -m_minus, 0.0, grading),
        mass_slack=mass_slack,
    )
    y1 = tanh_nodes(n1, 0.0, geometry.length, grading)
    exit_span = (
        float(geometry.wall_lower(geometry.length)),
        float(geometry.wall_upper(geometry.length)),
    )

    layers = []
    for sign, bgl, ent in (
        (+1, background.upper, dom.entrance_upper),
        (-1, background.lower, dom.entrance_lower),
    ):
        grid = LayerGrid(y1=y1, y2=ent.y2)
        if sign > 0:
            g2 = geometry.wall_upper(y1) - 1.0 + ent.g1[-1]
        else:
            g2 = geometry.wall_lower(y1) + 1.0 + ent.g1[0]
        _, f2 = gaslib.flux_w(
            (np.zeros_like(ent.y2), np.full_like(ent.y2, 1.0 / bgl.mass_flux)),
            ent.entropy, ent.bernoulli, background.gas.gamma,
        )
        f2 = background.pressure - f2
        layers.append(
            LayerData(
                sign=sign, grid=grid, gas=background.gas, background=bgl,
                entrance=ent, g2=g2, f2=f2,
                omega_exit=boundary.exit_angle, exit_span=exit_span,
            )
        )
    return layers[0], layers[1], dom


def sources_f(layer):
    """Source fields (f1, f2) tiled on the layer grid; depend on y2 only and
    vanish when the entrance data equal the background."""
    shape = layer.grid.shape
    f1 = np.zeros(shape)
    f2 = np.broadcast_to(layer.f2[None, :], shape).copy()
    return f1, f2


#: relative head-room of the exit-span guard: intermediate Picard iterates
#: (and the flat initial iterate when the entrance mass flux is perturbed)
#: overshoot the span by O(sigma); the guard is against O(1) excursions
EXIT_SPAN_SLACK = 0.05


def exit_condition(layer, phi_bar):
    """Lagged nonlinear exit data: omega(y2) = omega_ex(varphi(L, y2))."""
    x2_exit = layer.grid.y2 * layer.phi_b_slope + phi_bar[-1, :]
    lo, hi = layer.exit_span
    slack = EXIT_SPAN_SLACK * (hi - lo)
    if np.any(x2_exit < lo - slack) or np.any(x2_exit > hi + slack):
        raise ExitRangeError(
            "stream-function exit values left the nozzle exit span "
            f"[{lo:.6g}, {hi:.6g}]"
        )
    return layer.omega_exit(np.clip(x2_exit, lo, hi))


def _entrance_tables(layer):
    shape = layer.grid.shape
    a = np.broadcast_to(layer.entrance.entropy[None, :], shape)
    b = np.broadcast_to(layer.entrance.bernoulli[None, :], shape)
    return a, b


def _bvp_spec(layer, g_cd, omega):
    if layer.sign > 0:
        return MixedBvpSpec(
            g_left=layer.entrance.g1, g_bottom=np.asarray(g_cd, dtype=float),
            g_top=layer.g2, neumann_right=omega,
        )
    return MixedBvpSpec(
        g_left=layer.entrance.g1, g_bottom=layer.g2,
        g_top=np.asarray(g_cd, dtype=float), neumann_right=omega,
    )


def picard_step(layer, phi_bar, g_cd):
    """One frozen-coefficient solve: coefficients and the exit data are
    evaluated at phi_bar, the Dirichlet data at the given interface curve."""
    grid = layer.grid
    p_bar = apply_d1(phi_bar, grid.y1, axis=0)
    q_bar = apply_d1(phi_bar, grid.y2, axis=1)
    a_ent, b_ent = _entrance_tables(layer)
    grad_b = (np.zeros(grid.shape), np.full(grid.shape, layer.phi_b_slope))
    a11, a12, _, a22 = gaslib.coeff_a(grad_b, (p_bar, q_bar), a_ent, b_ent,
                                      layer.gas.gamma)
    f1, f2 = sources_f(layer)
    coeffs = CoefficientField.from_nodes(grid, a11, a22, a12, f1=f1, f2=f2)
    omega = exit_condition(layer, phi_bar)
    system = assemble(grid, coeffs, _bvp_spec(layer, g_cd, omega))
    return solve(system)


def solve_layer(layer, g_cd, settings=None):
    """Picard iteration for the layer problem at a fixed interface curve."""
    settings = settings or FixedPointSettings()
    phi_bar = np.zeros(layer.grid.shape)
    updates = []
    scale = None
    for iteration in range(1, settings.max_iters + 1):
        phi_new = picard_step(layer, phi_bar, g_cd)
        update = float(np.max(np.abs(phi_new - phi_bar)))
        updates.append(update)
        phi_bar = phi_bar + settings.damping * (phi_new - phi_bar)
        if update <= settings.tol_update:
            return reconstruct_fields(layer, phi_bar, iteration, updates)
        norm = float(np.max(np.abs(phi_bar)))
        if scale is None and norm > 0.0:
            scale = norm
        if scale is not None and norm > RUNAWAY_FACTOR * scale:
            raise IterationError(
                f"layer iterate grew to {norm:.3e} (> {RUNAWAY_FACTOR:g}x "
                f"first iterate {scale:.3e})", history=updates,
            )
    raise IterationError(
        f"layer fixed point not converged in {settings.max_iters} iterations "
        f"(last update {updates[-1]:.3e})", history=updates,
    )


def reconstruct_fields(layer, phi, iterations=0, update_norms=None):
    """Primitive fields (rho, u1, u2, P) from the stream-function solution."""
    grid = layer.grid
    varphi = phi + layer.phi_background()
    p = apply_d1(varphi, grid.y1, axis=0)
    q = apply_d1(varphi, grid.y2, axis=1)
    a_ent, b_ent = _entrance_tables(layer)
    gamma = layer.gas.gamma
    rho = gaslib.density_from_stream((p, q), a_ent, b_ent, gamma)
    u1, u2 = gaslib.velocity_from_stream(rho, (p, q))
    if np.any(u1 <= 0.0):
        raise ConsistencyError("reconstructed u1 is not positive everywhere")
    pressure = a_ent * rho**gamma
    mach = np.sqrt((u1**2 + u2**2) / gaslib.sound_speed_sq(rho, a_ent, gamma))
    return StreamField(
        sign=layer.sign, grid=grid, gamma=gamma, phi=np.array(phi), varphi=varphi,
        rho=rho, u1=u1, u2=u2, pressure=pressure,
        entropy=np.array(a_ent), bernoulli=np.array(b_ent), mach=mach,
        iterations=iterations, update_norms=list(update_norms or []),
    )

