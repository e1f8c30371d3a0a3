"""Two-layer subsonic nozzle flow with a free contact discontinuity.

The solver works in Lagrangian (mass-flux) coordinates where the interface is
the straight line y2 = 0: each layer reduces to a nonlinear divergence-form
elliptic problem for a stream function, solved by frozen-coefficient Picard
iteration, and the interface slope is found by a quasi-Newton loop whose
update operator is the explicit background pressure-jump inverse.
"""

from .config import ProblemConfig
from .errors import (
    ClosureError,
    ConfigError,
    ConsistencyError,
    ExitRangeError,
    IterationError,
    SolverError,
)
from .gas import GasConstants, ThermoState
from .interface import (
    InterfaceCurve,
    InterfaceResidual,
    OuterSettings,
    TwoLayerProblem,
    background_preconditioner,
    build_problem,
    pressure_jump,
    solve_free_boundary,
)
from .layer import FixedPointSettings, StreamField, solve_layer
from .problem import (
    BackgroundSolution,
    BoundaryData,
    EntranceProfiles,
    NozzleGeometry,
    Poly,
    build_background,
    mass_fluxes,
    perturbation_size,
)
from .reconstruct import (
    PhysicalField,
    conservation_residuals,
    inverse_map,
    rh_residuals,
    streamline_transport_residual,
)
from .runner import RunReport, refine, run, sweep

__all__ = [
    "BackgroundSolution",
    "BoundaryData",
    "ClosureError",
    "ConfigError",
    "ConsistencyError",
    "EntranceProfiles",
    "ExitRangeError",
    "FixedPointSettings",
    "GasConstants",
    "InterfaceCurve",
    "InterfaceResidual",
    "IterationError",
    "NozzleGeometry",
    "OuterSettings",
    "PhysicalField",
    "Poly",
    "ProblemConfig",
    "RunReport",
    "SolverError",
    "StreamField",
    "ThermoState",
    "TwoLayerProblem",
    "background_preconditioner",
    "build_background",
    "build_problem",
    "conservation_residuals",
    "inverse_map",
    "mass_fluxes",
    "perturbation_size",
    "pressure_jump",
    "refine",
    "rh_residuals",
    "run",
    "solve_free_boundary",
    "solve_layer",
    "streamline_transport_residual",
    "sweep",
]

__version__ = "0.1.0"
