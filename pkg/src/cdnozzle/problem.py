"""Physical problem definition and the Lagrangian (mass-coordinate) bookkeeping.

Holds the nozzle geometry, the entrance/exit boundary data, the piecewise
constant background flow, and the transformation of entrance profiles to mass
coordinates, where each layer occupies the rectangle [0, L] x [0, m+]
(upper) or [0, L] x [-m-, 0] (lower).
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ConfigError, ConsistencyError
from .gas import GasConstants, ThermoState, sound_speed_sq
from .norms import holder_norm_1d

#: sample count for sup/Hoelder evaluation of 1-D data norms
NORM_SAMPLES = 257

#: tolerance on the mass-coordinate endpoint x2(+-m) = +-1
ENDPOINT_TOL = 1e-10


@dataclass(frozen=True)
class Poly:
    """Power-basis polynomial with exact derivatives and antiderivative."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        if len(self.coeffs) == 0:
            object.__setattr__(self, "coeffs", (0.0,))

    def __call__(self, x, deriv=0):
        c = self.coeffs if deriv == 0 else npoly.polyder(self.coeffs, deriv)
        return npoly.polyval(np.asarray(x, dtype=float), c)

    def integral(self, lo, hi):
        anti = npoly.polyint(self.coeffs)
        return float(npoly.polyval(hi, anti) - npoly.polyval(lo, anti))

    def shifted(self, offset):
        c = list(self.coeffs)
        c[0] += offset
        return Poly(tuple(c))


ZERO_POLY = Poly((0.0,))


@dataclass(frozen=True)
class NozzleGeometry:
    """Nozzle of length L with wall curves g+(x1), g-(x1)."""

    length: float
    wall_upper: Poly
    wall_lower: Poly

    def __post_init__(self):
        if not self.length > 0.0:
            raise ConfigError(f"nozzle length must be positive, got {self.length}")
        if self.wall_upper(0.0) != 1.0 or self.wall_lower(0.0) != -1.0:
            raise ConfigError("walls must satisfy g+(0) = 1 and g-(0) = -1 exactly")
        x = np.linspace(0.0, self.length, NORM_SAMPLES)
        if not np.all(self.wall_lower(x) < self.wall_upper(x)):
            raise ConfigError("lower wall must stay strictly below upper wall")

    @classmethod
    def from_deviations(cls, length, dev_upper, dev_lower):
        """Build walls g+- = +-1 + deviation; deviations must vanish at x1 = 0."""
        up = Poly(dev_upper).shifted(1.0)
        lo = Poly(dev_lower).shifted(-1.0)
        if Poly(dev_upper)(0.0) != 0.0 or Poly(dev_lower)(0.0) != 0.0:
            raise ConfigError("wall deviations must vanish at the entrance")
        return cls(length, up, lo)


@dataclass(frozen=True)
class EntranceProfiles:
    """Absolute entrance profiles of (A, B, J) on one entrance segment."""

    entropy: Poly
    bernoulli: Poly
    mass_flux: Poly


@dataclass(frozen=True)
class BoundaryData:
    """Entrance profiles for both layers plus the exit flow angle."""

    entrance_upper: EntranceProfiles
    entrance_lower: EntranceProfiles
    exit_angle: Poly

    def __post_init__(self):
        for profiles, lo, hi, tag in (
            (self.entrance_upper, 0.0, 1.0, "upper"),
            (self.entrance_lower, -1.0, 0.0, "lower"),
        ):
            x = np.linspace(lo, hi, NORM_SAMPLES)
            if np.any(profiles.mass_flux(x) <= 0.0):
                raise ConfigError(f"entrance mass flux J_en ({tag}) must be positive")
            if np.any(profiles.entropy(x) <= 0.0) or np.any(profiles.bernoulli(x) <= 0.0):
                raise ConfigError(f"entrance A, B profiles ({tag}) must be positive")


@dataclass(frozen=True)
class LayerBackground:
    """Constant background state of one layer with its elliptic constants."""

    state: ThermoState

    @property
    def entropy_a(self):
        return self.state.entropy_a

    @property
    def bernoulli_b(self):
        return self.state.bernoulli_b

    @property
    def mass_flux(self):
        return self.state.mass_flux_j

    @cached_property
    def sound_sq(self):
        return float(self.state.sound_speed_squared)

    @property
    def e1(self):
        return self.state.u1

    @cached_property
    def e2(self):
        c2, u, rho = self.sound_sq, self.state.u1, self.state.rho
        return c2 * u**3 * rho**2 / (c2 - u**2)


@dataclass(frozen=True)
class BackgroundSolution:
    upper: LayerBackground
    lower: LayerBackground
    gas: GasConstants

    @property
    def pressure(self):
        return self.upper.state.pressure


def build_background(upper_state, lower_state, gas):
    """Validate and package the piecewise-constant background flow."""
    if upper_state.pressure != lower_state.pressure:
        raise ConfigError(
            "background layers must share one pressure "
            f"({upper_state.pressure} != {lower_state.pressure})"
        )
    for tag, state in (("upper", upper_state), ("lower", lower_state)):
        if state.u1 <= 0.0 or state.u2 != 0.0:
            raise ConfigError(f"background {tag} layer must be horizontal with u1 > 0")
        c2 = sound_speed_sq(state.rho, state.entropy_a, gas.gamma)
        if state.u1**2 >= c2 * (1.0 - 1e-6):
            raise ConfigError(
                f"background {tag} layer is not strictly subsonic "
                f"(u^2 = {state.u1 ** 2:.6g}, c^2 = {c2:.6g})"
            )
    bg = BackgroundSolution(LayerBackground(upper_state), LayerBackground(lower_state), gas)
    assert bg.upper.e1 > 0.0 and bg.upper.e2 > 0.0
    assert bg.lower.e1 > 0.0 and bg.lower.e2 > 0.0
    return bg


def mass_fluxes(boundary):
    """(m-, m+) = entrance integrals of J over each layer segment."""
    m_plus = boundary.entrance_upper.mass_flux.integral(0.0, 1.0)
    m_minus = boundary.entrance_lower.mass_flux.integral(-1.0, 0.0)
    if m_plus <= 0.0 or m_minus <= 0.0:
        raise ConfigError("entrance mass fluxes must be positive")
    return m_minus, m_plus


@dataclass(frozen=True)
class LagrangianEntrance:
    """Entrance data tabulated at the layer's y2 nodes in mass coordinates."""

    y2: np.ndarray
    x2: np.ndarray          # inverse mass coordinate, x2(y2)
    entropy: np.ndarray     # A~(y2)
    bernoulli: np.ndarray   # B~(y2)
    mass_flux: np.ndarray   # J~(y2)
    g1: np.ndarray          # entrance Dirichlet data for the perturbation


def entrance_to_lagrangian(profiles, y2_nodes, j_background, x2_end, oversample=4):
    """Tabulate transformed entrance data on the layer's y2 nodes.

    Solves dx2/dy2 = 1/J_en(x2), x2(0) = 0, by a classical RK4 march with
    `oversample` substeps per node interval, from the interface end (y2 = 0)
    outward.  The far endpoint must land on x2_end (the physical wall) within
    ENDPOINT_TOL.
    """
    y2 = np.asarray(y2_nodes, dtype=float)
    from_interface = y2[0] == 0.0
    order = y2 if from_interface else y2[::-1]
    j_en = profiles.mass_flux

    def rhs(x2):
        return 1.0 / j_en(x2)

    x2_vals = np.empty_like(order)
    x2_vals[0] = 0.0
    substeps = max(oversample, int(np.ceil(256 / max(len(order) - 1, 1))))
    for k in range(len(order) - 1):
        x = x2_vals[k]
        h_total = order[k + 1] - order[k]
        h = h_total / substeps
        for _ in range(substeps):
            k1 = rhs(x)
            k2 = rhs(x + 0.5 * h * k1)
            k3 = rhs(x + 0.5 * h * k2)
            k4 = rhs(x + h * k3)
            x = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        x2_vals[k + 1] = x

    defect = abs(x2_vals[-1] - x2_end)
    if defect > ENDPOINT_TOL:
        raise ConsistencyError(
            f"mass-coordinate endpoint defect {defect:.3e} exceeds {ENDPOINT_TOL:g}"
        )
    if from_interface:
        x2_sorted = x2_vals
    else:
        x2_sorted = x2_vals[::-1]
    if not np.all(np.diff(x2_sorted) > 0.0):
        raise ConsistencyError("mass coordinate x2(y2) is not strictly increasing")
    return LagrangianEntrance(
        y2=y2,
        x2=x2_sorted,
        entropy=profiles.entropy(x2_sorted),
        bernoulli=profiles.bernoulli(x2_sorted),
        mass_flux=profiles.mass_flux(x2_sorted),
        g1=x2_sorted - y2 / j_background,
    )


def perturbation_size(geometry, boundary, background, alpha=0.5,
                      n_samples=NORM_SAMPLES):
    """Size sigma of the data perturbation: the sum of C^{1,alpha} entrance
    norms, the C^{2,alpha} exit-angle norm, and the C^{2,alpha} norms of the
    wall deviations.  Derivatives are exact (coefficient representation)."""

    def profile_norm(poly, offset, lo, hi, order):
        dev = poly.shifted(-offset)
        x = np.linspace(lo, hi, n_samples)
        derivs = [dev(x, deriv=k) for k in range(order + 1)]
        return holder_norm_1d(derivs, x, alpha)

    up, low = background.upper, background.lower
    sigma = 0.0
    for profiles, bgl, lo, hi in (
        (boundary.entrance_upper, up, 0.0, 1.0),
        (boundary.entrance_lower, low, -1.0, 0.0),
    ):
        sigma += profile_norm(profiles.entropy, bgl.entropy_a, lo, hi, 1)
        sigma += profile_norm(profiles.bernoulli, bgl.bernoulli_b, lo, hi, 1)
        sigma += profile_norm(profiles.mass_flux, bgl.mass_flux, lo, hi, 1)
    exit_lo = float(geometry.wall_lower(geometry.length))
    exit_hi = float(geometry.wall_upper(geometry.length))
    sigma += profile_norm(boundary.exit_angle, 0.0, exit_lo, exit_hi, 2)
    sigma += profile_norm(geometry.wall_upper, 1.0, 0.0, geometry.length, 2)
    sigma += profile_norm(geometry.wall_lower, -1.0, 0.0, geometry.length, 2)
    return sigma


@dataclass(frozen=True)
class LagrangianDomain:
    """Both layer rectangles with transformed entrance data."""

    m_plus: float
    m_minus: float
    entrance_upper: LagrangianEntrance
    entrance_lower: LagrangianEntrance

    def __post_init__(self):
        if abs(self.entrance_upper.y2[-1] - self.m_plus) > 1e-14:
            raise ConsistencyError("upper rectangle height differs from m+")
        if abs(self.entrance_lower.y2[0] + self.m_minus) > 1e-14:
            raise ConsistencyError("lower rectangle depth differs from m-")


def build_lagrangian_domain(boundary, background, y2_upper, y2_lower,
                            mass_slack=None):
    """Transform both entrances to mass coordinates on the given node arrays.

    The background mass fluxes must match the perturbed ones within a
    sigma-sized slack (the normalization m_b = m the theory assumes).
    """
    m_minus, m_plus = mass_fluxes(boundary)
    if mass_slack is not None:
        for m, j_b, tag in (
            (m_plus, background.upper.mass_flux, "upper"),
            (m_minus, background.lower.mass_flux, "lower"),
        ):
            if abs(m - j_b) > mass_slack:
                raise ConfigError(
                    f"{tag} entrance mass flux {m:.12g} deviates from the "
                    f"background value {j_b:.12g} by more than {mass_slack:.3g}"
                )
    upper = entrance_to_lagrangian(
        boundary.entrance_upper, y2_upper, background.upper.mass_flux, 1.0
    )
    lower = entrance_to_lagrangian(
        boundary.entrance_lower, y2_lower, background.lower.mass_flux, -1.0
    )
    return LagrangianDomain(m_plus=m_plus, m_minus=m_minus,
                            entrance_upper=upper, entrance_lower=lower)
