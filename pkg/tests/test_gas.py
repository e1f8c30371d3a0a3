import numpy as np
import pytest

from cdnozzle import gas
from cdnozzle.errors import ClosureError

from oracles import coeff_a_quadrature_oracle, density_bisection, random_subsonic_states

GAMMA = 1.4

# canonical two-layer background: shared pressure 1, upper (rho=1, u=0.5),
# lower (rho=0.8, u=0.7)
A_UP, B_UP = 1.0, 3.625
A_LO = 1.0 / 0.8**GAMMA
B_LO = 0.5 * 0.49 + GAMMA / ((GAMMA - 1.0) * 0.8)
GRAD_UP = (0.0, 2.0)
GRAD_LO = (0.0, 1.0 / 0.56)


def test_sound_speed_direct_values():
    assert gas.sound_speed_sq(1.0, 1.0, GAMMA) == pytest.approx(1.4, abs=1e-14)
    assert gas.sound_speed_sq(1.0, 1.0 / GAMMA, GAMMA) == pytest.approx(1.0, abs=1e-14)
    # A = P/rho^gamma at P=1, rho=0.8 gives c^2 = gamma*P/rho
    assert gas.sound_speed_sq(0.8, A_LO, GAMMA) == pytest.approx(1.75, abs=1e-3)


def test_sound_speed_monotone_in_rho():
    rho = np.linspace(0.3, 2.0, 50)
    c2 = gas.sound_speed_sq(rho, 1.2, GAMMA)
    assert np.all(np.diff(c2) > 0)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_sound_speed_domain_error(bad):
    with pytest.raises(ValueError):
        gas.sound_speed_sq(bad, 1.0, GAMMA)
    with pytest.raises(ValueError):
        gas.sound_speed_sq(1.0, bad, GAMMA)


def test_density_background_consistency():
    assert gas.density_from_stream(GRAD_UP, A_UP, B_UP, GAMMA) == pytest.approx(1.0, abs=1e-12)
    rho_lo = gas.density_from_stream(GRAD_LO, A_LO, B_LO, GAMMA)
    assert rho_lo == pytest.approx(density_bisection(GRAD_LO, A_LO, B_LO, GAMMA), abs=1e-10)
    assert rho_lo == pytest.approx(0.8, abs=1e-10)


def test_density_roundtrip_against_bisection_oracle():
    rng = np.random.default_rng(20240817)
    for p, q, a, b, rho_true in random_subsonic_states(rng, 1000):
        rho = gas.density_from_stream((p, q), a, b, GAMMA)
        assert abs(rho - rho_true) <= 1e-12 * rho_true
        rho_oracle = density_bisection((p, q), a, b, GAMMA)
        assert abs(rho - rho_oracle) <= 1e-12 * rho_oracle


def test_density_vectorized_matches_scalar():
    rng = np.random.default_rng(7)
    states = random_subsonic_states(rng, 64)
    p = np.array([s[0] for s in states])
    q = np.array([s[1] for s in states])
    a = np.array([s[2] for s in states])
    b = np.array([s[3] for s in states])
    rho_vec = gas.density_from_stream((p, q), a, b, GAMMA)
    rho_scal = np.array([gas.density_from_stream((s[0], s[1]), s[2], s[3], GAMMA) for s in states])
    np.testing.assert_allclose(rho_vec, rho_scal, rtol=1e-12, atol=0.0)


def test_density_closure_failures():
    with pytest.raises(ValueError):
        gas.density_from_stream((0.0, -2.0), A_UP, B_UP, GAMMA)
    # Bernoulli constant too small for the required mass flux: no subsonic root
    with pytest.raises(ClosureError) as err:
        gas.density_from_stream((0.0, 2.0), A_UP, 1.05, GAMMA)
    assert err.value.sonic_residual is not None and err.value.sonic_residual >= 0.0


def test_near_sonic_guard():
    # state engineered just below sonic: guard must reject it
    rho, u1 = 1.0, 0.999
    a = 1.0 / GAMMA  # c^2 = rho^(gamma-1)
    b = 0.5 * u1**2 + a * GAMMA * rho ** (GAMMA - 1.0) / (GAMMA - 1.0)
    with pytest.raises(ClosureError):
        gas.density_from_stream((0.0, 1.0 / (rho * u1)), a, b, GAMMA, sonic_margin=1e-2)


def test_subsonic_branch_selected():
    rng = np.random.default_rng(3)
    for p, q, a, b, _ in random_subsonic_states(rng, 50):
        rho = gas.density_from_stream((p, q), a, b, GAMMA)
        assert gas.sound_speed_sq(rho, a, GAMMA) > (1.0 + p**2) / (rho * q) ** 2


def test_sensitivities_background_values():
    d_p, d_q, d_a, d_b = gas.density_sensitivities(GRAD_UP, A_UP, B_UP, GAMMA)
    assert d_p == pytest.approx(0.0, abs=1e-14)
    assert d_b == pytest.approx(1.0 / (1.4 - 0.25), abs=1e-6)  # rho/(c^2-|u|^2)
    # d rho/dq at background from the printed formula: 1/(rho*q^3*(c^2-|u|^2))
    assert d_q == pytest.approx(1.0 / (1.0 * 8.0 * 1.15), rel=1e-12)


def test_sensitivities_match_finite_differences():
    rng = np.random.default_rng(99)
    step = 1e-6
    for p, q, a, b, _ in random_subsonic_states(rng, 100):
        sens = gas.density_sensitivities((p, q), a, b, GAMMA)
        args = [p, q, a, b]
        for k in range(4):
            hi = list(args)
            lo = list(args)
            hi[k] += step
            lo[k] -= step
            fd = (
                gas.density_from_stream((hi[0], hi[1]), hi[2], hi[3], GAMMA)
                - gas.density_from_stream((lo[0], lo[1]), lo[2], lo[3], GAMMA)
            ) / (2.0 * step)
            denom = max(abs(sens[k]), 1e-8)
            assert abs(fd - sens[k]) / denom <= 1e-5


def test_flux_w_background_and_composition():
    assert gas.flux_w(GRAD_UP, A_UP, B_UP, GAMMA) == pytest.approx((0.0, 1.0), abs=1e-12)
    assert gas.flux_w(GRAD_LO, A_LO, B_LO, GAMMA) == pytest.approx((0.0, 1.0), abs=1e-10)
    w1, w2 = gas.flux_w((0.01, 2.0), A_UP, B_UP, GAMMA)
    rho = gas.density_from_stream((0.01, 2.0), A_UP, B_UP, GAMMA)
    assert w2 == pytest.approx(A_UP * rho**GAMMA, rel=1e-12)
    assert w1 == pytest.approx(0.01 / (rho * 2.0), rel=1e-12)
    # W1 vanishes with the tangential gradient component
    assert gas.flux_w((0.0, 1.9), A_UP, B_UP, GAMMA)[0] == 0.0


def test_coeff_a_background_diagonal():
    a11, a12, a21, a22 = gas.coeff_a(GRAD_UP, (0.0, 0.0), A_UP, B_UP, GAMMA)
    assert a11 == pytest.approx(0.5, abs=1e-12)
    assert a22 == pytest.approx(0.15217, abs=1e-4)
    assert abs(a12) + abs(a21) <= 1e-14
    _, _, _, a22_lo = gas.coeff_a(GRAD_LO, (0.0, 0.0), A_LO, B_LO, GAMMA)
    assert a22_lo == pytest.approx(0.30489, abs=1e-4)


def test_coeff_a_matches_quadrature_oracle():
    rng = np.random.default_rng(11)
    for _ in range(20):
        bar = (rng.uniform(-0.05, 0.05), rng.uniform(-0.05, 0.05))
        ours = gas.coeff_a(GRAD_UP, bar, A_UP, B_UP, GAMMA)
        oracle = coeff_a_quadrature_oracle(GRAD_UP, bar, A_UP, B_UP, GAMMA)
        np.testing.assert_allclose(ours, oracle, rtol=0.0, atol=1e-10)


def test_coeff_a_symmetry_and_ellipticity_near_background():
    rng = np.random.default_rng(13)
    e_min_up = min(0.5, 0.175 / 1.15)
    for _ in range(50):
        # states within 10% of the background gradient
        bar = (rng.uniform(-0.1, 0.1) * 0.0 + rng.uniform(-0.05, 0.05),
               rng.uniform(-0.1, 0.1) * 2.0)
        a11, a12, a21, a22 = gas.coeff_a(GRAD_UP, bar, A_UP, B_UP, GAMMA)
        assert a12 == a21
        lam = gas.ellipticity_min_eigenvalue(a11, a12, a22)
        assert lam >= 0.5 * e_min_up


def test_coeff_a_sonic_segment_rejected():
    # shrinking q speeds the flow up; the segment end is past the sonic surface
    with pytest.raises(ClosureError):
        gas.coeff_a(GRAD_UP, (0.0, -1.95), A_UP, B_UP, GAMMA)


def test_thermo_state_invariants():
    state = gas.ThermoState(rho=1.0, u1=0.5, u2=0.0, pressure=1.0, gamma=GAMMA)
    assert state.pressure == pytest.approx(state.entropy_a * state.rho**GAMMA, rel=1e-12)
    assert state.bernoulli_b == pytest.approx(3.625, rel=1e-12)
    assert state.mass_flux_j == pytest.approx(0.5, rel=1e-12)
    assert state.is_subsonic
    p, q = state.stream_gradient()
    assert (p, q) == pytest.approx((0.0, 2.0), abs=1e-14)
    rho = gas.density_from_stream((p, q), state.entropy_a, state.bernoulli_b, GAMMA)
    assert rho == pytest.approx(state.rho, rel=1e-12)


def test_thermo_state_roundtrip_random():
    rng = np.random.default_rng(5)
    for _ in range(200):
        rho = rng.uniform(0.5, 1.5)
        u1 = rng.uniform(0.15, 0.7)
        u2 = rng.uniform(-0.2, 0.2)
        state = gas.ThermoState(rho=rho, u1=u1, u2=u2, pressure=rng.uniform(0.8, 1.4), gamma=GAMMA)
        if not state.is_subsonic:
            continue
        p, q = state.stream_gradient()
        back = gas.density_from_stream((p, q), state.entropy_a, state.bernoulli_b, GAMMA)
        assert abs(back - rho) <= 1e-12 * rho


def test_gas_constants_validation():
    with pytest.raises(ValueError):
        gas.GasConstants(gamma=0.9)
    with pytest.raises(ValueError):
        gas.GasConstants(gamma=1.4, r_gas=0.0)
    assert gas.GasConstants(1.4).entropy_of(1.0) == pytest.approx(0.0)
