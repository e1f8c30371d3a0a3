"""Run configuration: a strict JSON schema mapped onto solver inputs.

All boundary functions are finite polynomial coefficient lists (ascending
power basis); the perturbation block stores unit shapes that are multiplied
by the scalar `amplitude`, so amplitude sweeps scale every data perturbation
together (walls included).
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .gas import GasConstants, ThermoState
from .layer import FixedPointSettings
from .interface import OuterSettings
from .problem import (
    BoundaryData,
    EntranceProfiles,
    NozzleGeometry,
    Poly,
    build_background,
    perturbation_size,
)

_GAS_KEYS = {"gamma", "r_gas"}
_BACKGROUND_KEYS = {"rho_upper", "u_upper", "rho_lower", "u_lower", "pressure"}
_GEOMETRY_KEYS = {"length", "wall_upper_deviation", "wall_lower_deviation"}
_ENTRANCE_KEYS = {"entropy", "bernoulli", "mass_flux"}
_PERTURBATION_KEYS = {"amplitude", "entrance_upper", "entrance_lower", "exit_angle"}
_NUMERICS_KEYS = {
    "n1", "n2", "alpha", "grading", "tol_update", "max_picard",
    "picard_damping", "tol_q_rel", "max_outer", "newton_damping",
}
_EXPERIMENT_KEYS = {"mode", "sweep_amplitudes", "refine_grids"}
_TOP_KEYS = {"gas", "background", "geometry", "perturbation", "numerics", "experiment"}

_NUMERICS_DEFAULTS = {
    "n1": 65, "n2": 65, "alpha": 0.5, "grading": 1.5,
    "tol_update": 1e-12, "max_picard": 60, "picard_damping": 1.0,
    "tol_q_rel": 1e-9, "max_outer": 30, "newton_damping": 1.0,
}
_EXPERIMENT_DEFAULTS = {
    "mode": "solve",
    "sweep_amplitudes": [1e-2, 5e-3, 2.5e-3],
    "refine_grids": [33, 65, 129],
}


def _require_keys(block, allowed, where, required=None):
    if not isinstance(block, dict):
        raise ConfigError(f"config section '{where}' must be an object")
    unknown = set(block) - allowed
    if unknown:
        raise ConfigError(f"unknown key '{where}.{sorted(unknown)[0]}'")
    for key in (required if required is not None else allowed):
        if key not in block:
            raise ConfigError(f"missing key '{where}.{key}'")


def _coeffs(value, where):
    if not isinstance(value, (list, tuple)) or not all(
        isinstance(v, (int, float)) for v in value
    ):
        raise ConfigError(f"'{where}' must be a list of numbers")
    return tuple(float(v) for v in value)


@dataclass(frozen=True)
class ShapeSet:
    """Unit perturbation shapes; scaled by the amplitude at build time."""

    wall_upper: tuple
    wall_lower: tuple
    entrance_upper: dict
    entrance_lower: dict
    exit_angle: tuple


@dataclass(frozen=True)
class ProblemConfig:
    gas: GasConstants
    upper_state: ThermoState
    lower_state: ThermoState
    length: float
    shapes: ShapeSet
    amplitude: float
    numerics: dict = field(default_factory=dict)
    mode: str = "solve"
    sweep_amplitudes: tuple = ()
    refine_grids: tuple = ()

    @classmethod
    def from_dict(cls, data):
        _require_keys(data, _TOP_KEYS, "config",
                      required={"gas", "background", "geometry", "perturbation"})
        gas_block = data["gas"]
        _require_keys(gas_block, _GAS_KEYS, "gas", required={"gamma"})
        gamma = float(gas_block["gamma"])
        if not gamma > 1.0:
            raise ConfigError(f"'gas.gamma' must exceed 1, got {gamma}")
        r_gas = float(gas_block.get("r_gas", 1.0))
        if not r_gas > 0.0:
            raise ConfigError(f"'gas.r_gas' must be positive, got {r_gas}")
        gas = GasConstants(gamma=gamma, r_gas=r_gas)

        bgb = data["background"]
        _require_keys(bgb, _BACKGROUND_KEYS, "background")
        for key in _BACKGROUND_KEYS:
            if not float(bgb[key]) > 0.0:
                raise ConfigError(f"'background.{key}' must be positive")
        try:
            upper = ThermoState(rho=float(bgb["rho_upper"]), u1=float(bgb["u_upper"]),
                                u2=0.0, pressure=float(bgb["pressure"]), gamma=gamma)
            lower = ThermoState(rho=float(bgb["rho_lower"]), u1=float(bgb["u_lower"]),
                                u2=0.0, pressure=float(bgb["pressure"]), gamma=gamma)
        except ValueError as exc:
            raise ConfigError(f"invalid background state: {exc}") from exc

        geo = data["geometry"]
        _require_keys(geo, _GEOMETRY_KEYS, "geometry", required={"length"})
        length = float(geo["length"])
        if not length > 0.0:
            raise ConfigError(f"'geometry.length' must be positive, got {length}")

        pert = data["perturbation"]
        _require_keys(pert, _PERTURBATION_KEYS, "perturbation", required=set())
        amplitude = float(pert.get("amplitude", 0.0))
        if amplitude < 0.0:
            raise ConfigError("'perturbation.amplitude' must be non-negative")

        def entrance_shapes(block, where):
            if block is None:
                return {"entropy": (), "bernoulli": (), "mass_flux": ()}
            _require_keys(block, _ENTRANCE_KEYS, where, required=set())
            return {k: _coeffs(block.get(k, ()), f"{where}.{k}") for k in _ENTRANCE_KEYS}

        shapes = ShapeSet(
            wall_upper=_coeffs(geo.get("wall_upper_deviation", ()), "geometry.wall_upper_deviation"),
            wall_lower=_coeffs(geo.get("wall_lower_deviation", ()), "geometry.wall_lower_deviation"),
            entrance_upper=entrance_shapes(pert.get("entrance_upper"), "perturbation.entrance_upper"),
            entrance_lower=entrance_shapes(pert.get("entrance_lower"), "perturbation.entrance_lower"),
            exit_angle=_coeffs(pert.get("exit_angle", ()), "perturbation.exit_angle"),
        )
        for shape, where in ((shapes.wall_upper, "wall_upper_deviation"),
                             (shapes.wall_lower, "wall_lower_deviation")):
            if shape and shape[0] != 0.0:
                raise ConfigError(
                    f"'geometry.{where}' must vanish at the entrance (constant term 0)"
                )

        numerics = dict(_NUMERICS_DEFAULTS)
        if "numerics" in data:
            _require_keys(data["numerics"], _NUMERICS_KEYS, "numerics", required=set())
            numerics.update(data["numerics"])
        for key in ("tol_update", "tol_q_rel"):
            if not float(numerics[key]) > 0.0:
                raise ConfigError(f"'numerics.{key}' must be positive")
        for key in ("n1", "n2", "max_picard", "max_outer"):
            if int(numerics[key]) < 5:
                raise ConfigError(f"'numerics.{key}' is too small")
        if not 0.0 < float(numerics["alpha"]) < 1.0:
            raise ConfigError("'numerics.alpha' must lie in (0, 1)")

        experiment = dict(_EXPERIMENT_DEFAULTS)
        if "experiment" in data:
            _require_keys(data["experiment"], _EXPERIMENT_KEYS, "experiment", required=set())
            experiment.update(data["experiment"])
        if experiment["mode"] not in ("solve", "refine", "sweep"):
            raise ConfigError(f"unknown experiment.mode '{experiment['mode']}'")
        amps = tuple(float(a) for a in experiment["sweep_amplitudes"])
        validate_amplitudes(amps)
        grids = tuple(int(g) for g in experiment["refine_grids"])
        if any(g < 9 for g in grids):
            raise ConfigError("'experiment.refine_grids' entries must be >= 9")

        return cls(
            gas=gas, upper_state=upper, lower_state=lower, length=length,
            shapes=shapes, amplitude=amplitude, numerics=numerics,
            mode=experiment["mode"], sweep_amplitudes=amps, refine_grids=grids,
        )

    @classmethod
    def load(cls, path):
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = json.load(handle)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def with_amplitude(self, amplitude):
        return ProblemConfig(
            gas=self.gas, upper_state=self.upper_state, lower_state=self.lower_state,
            length=self.length, shapes=self.shapes, amplitude=float(amplitude),
            numerics=self.numerics, mode=self.mode,
            sweep_amplitudes=self.sweep_amplitudes, refine_grids=self.refine_grids,
        )

    def with_grid(self, n):
        numerics = dict(self.numerics)
        numerics["n1"] = numerics["n2"] = int(n)
        return ProblemConfig(
            gas=self.gas, upper_state=self.upper_state, lower_state=self.lower_state,
            length=self.length, shapes=self.shapes, amplitude=self.amplitude,
            numerics=numerics, mode=self.mode,
            sweep_amplitudes=self.sweep_amplitudes, refine_grids=self.refine_grids,
        )

    def build_geometry(self):
        def scaled(coeffs):
            return tuple(self.amplitude * c for c in coeffs) or (0.0,)

        return NozzleGeometry.from_deviations(
            self.length, scaled(self.shapes.wall_upper), scaled(self.shapes.wall_lower)
        )

    def build_boundary(self, background):
        def profile(constant, coeffs):
            base = [0.0] * max(1, len(coeffs))
            for k, c in enumerate(coeffs):
                base[k] = self.amplitude * c
            base[0] += constant
            return Poly(tuple(base))

        def entrance(bgl, shapes):
            return EntranceProfiles(
                entropy=profile(bgl.entropy_a, shapes["entropy"]),
                bernoulli=profile(bgl.bernoulli_b, shapes["bernoulli"]),
                mass_flux=profile(bgl.mass_flux, shapes["mass_flux"]),
            )

        return BoundaryData(
            entrance_upper=entrance(background.upper, self.shapes.entrance_upper),
            entrance_lower=entrance(background.lower, self.shapes.entrance_lower),
            exit_angle=Poly(tuple(self.amplitude * c for c in self.shapes.exit_angle) or (0.0,)),
        )

    def build_background(self):
        return build_background(self.upper_state, self.lower_state, self.gas)

    def build_all(self):
        background = self.build_background()
        geometry = self.build_geometry()
        boundary = self.build_boundary(background)
        sigma = perturbation_size(geometry, boundary, background,
                                  alpha=float(self.numerics["alpha"]))
        return geometry, boundary, background, sigma

    def fixed_point_settings(self):
        return FixedPointSettings(
            tol_update=float(self.numerics["tol_update"]),
            max_iters=int(self.numerics["max_picard"]),
            damping=float(self.numerics["picard_damping"]),
        )

    def outer_settings(self):
        return OuterSettings(
            tol_q_rel=float(self.numerics["tol_q_rel"]),
            max_outer=int(self.numerics["max_outer"]),
            damping=float(self.numerics["newton_damping"]),
        )


def validate_amplitudes(amps):
    if any(a < 0.0 for a in amps):
        raise ConfigError("sweep amplitudes must be non-negative")
    if any(b >= a for a, b in zip(amps, amps[1:])):
        raise ConfigError("sweep amplitudes must be strictly descending")
    return tuple(amps)
