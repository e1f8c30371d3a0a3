import pytest

from cdnozzle import layer as layerlib
from cdnozzle import problem
from cdnozzle.gas import GasConstants, ThermoState

GAMMA = 1.4


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Print the FAIL counterpart of the acceptance PASS lines."""
    outcome = yield
    report = outcome.get_result()
    if report.when == "call" and report.failed and "test_criterion_" in item.name:
        number = item.name.split("test_criterion_")[1].split("_")[0]
        print(f"\nACCEPTANCE {number}: FAIL - {item.name}")


def canonical_background():
    gas = GasConstants(gamma=GAMMA)
    upper = ThermoState(rho=1.0, u1=0.5, u2=0.0, pressure=1.0, gamma=GAMMA)
    lower = ThermoState(rho=0.8, u1=0.7, u2=0.0, pressure=1.0, gamma=GAMMA)
    return problem.build_background(upper, lower, gas)


def entrance_background(bgl, a_dev=(), b_dev=(), j_dev=()):
    """Entrance profiles = background constants plus polynomial deviations."""

    def poly(constant, dev):
        coeffs = [constant] + [0.0] * max(0, len(dev))
        for k, c in enumerate(dev):
            coeffs[k] += c
        return problem.Poly(tuple(coeffs))

    return problem.EntranceProfiles(
        entropy=poly(bgl.entropy_a, a_dev),
        bernoulli=poly(bgl.bernoulli_b, b_dev),
        mass_flux=poly(bgl.mass_flux, j_dev),
    )


def make_setup(wall_up=(), wall_lo=(), omega=(), a_up=(), b_up=(), j_up=(),
               a_lo=(), b_lo=(), length=1.0, background=None):
    """Geometry + boundary data around the canonical background."""
    bg = background or canonical_background()
    geometry = problem.NozzleGeometry.from_deviations(
        length, tuple(wall_up) or (0.0,), tuple(wall_lo) or (0.0,)
    )
    boundary = problem.BoundaryData(
        entrance_upper=entrance_background(bg.upper, a_up, b_up, j_up),
        entrance_lower=entrance_background(bg.lower, a_lo, b_lo),
        exit_angle=problem.Poly(tuple(omega) or (0.0,)),
    )
    return geometry, boundary, bg


# x1^2 (1-x1)^2 bump and x2(1-x2^2) exit-angle shape, both vanishing at the
# corners the theory needs clean
WALL_BUMP = (0.0, 0.0, 1.0, -2.0, 1.0)
EXIT_SHAPE = (0.0, 1.0, 0.0, -1.0)


def reference_setup(amplitude):
    """Wall + exit-angle perturbation of the canonical background."""
    return make_setup(
        wall_up=tuple(amplitude * c for c in WALL_BUMP),
        wall_lo=tuple(-0.6 * amplitude * c for c in WALL_BUMP),
        omega=tuple(0.8 * amplitude * c for c in EXIT_SHAPE),
    )


def symmetric_setup(amplitude):
    """Mirror-symmetric two-layer configuration: identical states, mirrored
    walls, odd exit angle; its exact interface is flat."""
    gas = GasConstants(gamma=GAMMA)
    state = ThermoState(rho=1.0, u1=0.5, u2=0.0, pressure=1.0, gamma=GAMMA)
    bg = problem.build_background(state, state, gas)
    return make_setup(
        wall_up=tuple(amplitude * c for c in WALL_BUMP),
        wall_lo=tuple(-amplitude * c for c in WALL_BUMP),
        omega=tuple(amplitude * c for c in EXIT_SHAPE),
        background=bg,
    )


@pytest.fixture(scope="session")
def background():
    return canonical_background()


@pytest.fixture(scope="session")
def reference_layers_33():
    geometry, boundary, bg = reference_setup(2e-3)
    up, lo, dom = layerlib.build_layers(geometry, boundary, bg, 33, 33)
    return up, lo, dom, bg
