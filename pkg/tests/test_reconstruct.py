import numpy as np
import pytest

from cdnozzle import layer as layerlib
from cdnozzle import reconstruct as rec
from cdnozzle.errors import ConsistencyError
from cdnozzle.layer import solve_layer

from conftest import make_setup, reference_setup
from oracles import fit_order


def solved_layers(geometry, boundary, bg, n, g_cd_fn=None):
    up, lo, dom = layerlib.build_layers(geometry, boundary, bg, n, n)
    y1 = up.grid.y1
    g_cd = np.zeros(n) if g_cd_fn is None else g_cd_fn(y1)
    f_up = solve_layer(up, g_cd)
    f_lo = solve_layer(lo, g_cd)
    return up, lo, f_up, f_lo, g_cd, dom


def test_inverse_map_background(background):
    geometry, boundary, bg = make_setup(background=background)
    up, lo, f_up, f_lo, g_cd, _ = solved_layers(geometry, boundary, bg, 33)
    phys_up = rec.inverse_map(f_up, g_cd, geometry.wall_upper)
    phys_lo = rec.inverse_map(f_lo, g_cd, geometry.wall_lower)
    # linear map x2 = y2/(rho_b u_b); upper wall lands exactly on 1
    np.testing.assert_allclose(
        phys_up.x2, np.broadcast_to(up.grid.y2[None, :] / 0.5, phys_up.x2.shape),
        atol=1e-11,
    )
    assert phys_up.wall_defect <= 1e-11
    assert phys_lo.wall_defect <= 1e-11
    assert np.all(np.diff(phys_up.x2, axis=1) > 0.0)
    assert np.all(phys_up.mach < 1.0)


def test_inverse_map_wall_defect_small_and_converging(background):
    defects, hs = [], []
    for n in (17, 33, 65):
        geometry, boundary, bg = reference_setup(1e-2)
        up, lo, f_up, f_lo, g_cd, _ = solved_layers(
            geometry, boundary, bg, n, lambda y: 1e-3 * y * (1.0 - y)
        )
        phys_up = rec.inverse_map(f_up, g_cd, geometry.wall_upper)
        defects.append(phys_up.wall_defect)
        hs.append(up.grid.h_max)
    assert defects[1] <= 5e-4
    assert fit_order(hs, defects) >= 1.5


def test_inverse_map_rejects_mismatched_wall(background):
    geometry, boundary, bg = make_setup(background=background)
    wrong_geo, _, _ = make_setup(wall_up=(0.0, 0.3), background=background)
    _, _, f_up, _, g_cd, _ = solved_layers(geometry, boundary, bg, 17)
    with pytest.raises(ConsistencyError, match="wall"):
        rec.inverse_map(f_up, g_cd, wrong_geo.wall_upper, tol_geom=1e-6)


def test_rh_residuals_background(background):
    geometry, boundary, bg = make_setup(background=background)
    _, _, f_up, f_lo, g_cd, _ = solved_layers(geometry, boundary, bg, 33)
    phys_up = rec.inverse_map(f_up, g_cd, geometry.wall_upper)
    phys_lo = rec.inverse_map(f_lo, g_cd, geometry.wall_lower)
    report = rec.rh_residuals(phys_up, phys_lo, g_cd)
    assert report["pressure_jump_max"] <= 1e-11
    assert report["tangency_upper_max"] <= 1e-11
    assert report["tangency_lower_max"] <= 1e-11


def test_tangency_residual_order(background):
    # the imposed curve must satisfy the exit-corner compatibility
    # g'(L) = omega_ex(g(L)) that the true free boundary carries; here the
    # exit angle is unperturbed and the curve has zero end slopes
    errs, hs = [], []
    for n in (17, 33, 65):
        geometry, boundary, bg = make_setup(
            wall_up=tuple(1e-2 * c for c in (0.0, 0.0, 1.0, -2.0, 1.0)),
            background=background,
        )
        up, lo, f_up, f_lo, g_cd, _ = solved_layers(
            geometry, boundary, bg, n, lambda y: 2e-3 * y**2 * (1.0 - y) ** 2
        )
        phys_up = rec.inverse_map(f_up, g_cd, geometry.wall_upper)
        phys_lo = rec.inverse_map(f_lo, g_cd, geometry.wall_lower)
        report = rec.rh_residuals(phys_up, phys_lo, g_cd)
        errs.append(max(report["tangency_upper_max"], report["tangency_lower_max"]))
        hs.append(up.grid.h_max)
    assert fit_order(hs, errs) >= 1.5, (errs, fit_order(hs, errs))


def test_conservation_background(background):
    geometry, boundary, bg = make_setup(background=background)
    _, _, f_up, f_lo, g_cd, dom = solved_layers(geometry, boundary, bg, 33)
    phys_up = rec.inverse_map(f_up, g_cd, geometry.wall_upper)
    report = rec.conservation_residuals(phys_up, dom.m_plus, geometry.wall_upper)
    assert report["mass_defect_max"] <= 1e-12
    assert report["slip_max"] <= 1e-11


def test_conservation_perturbed_orders(background):
    mass, slip, hs = [], [], []
    for n in (17, 33, 65):
        geometry, boundary, bg = reference_setup(1e-2)
        up, _, f_up, _, g_cd, dom = solved_layers(
            geometry, boundary, bg, n, lambda y: 1e-3 * y * (1.0 - y)
        )
        phys_up = rec.inverse_map(f_up, g_cd, geometry.wall_upper)
        report = rec.conservation_residuals(phys_up, dom.m_plus, geometry.wall_upper)
        mass.append(report["mass_defect_max"])
        slip.append(report["slip_max"])
        hs.append(up.grid.h_max)
    assert fit_order(hs, mass) >= 1.5, mass
    assert fit_order(hs, slip) >= 1.5, slip
    assert mass[-1] <= 1e-6


def test_streamline_transport_order(background):
    # entrance perturbation makes A, B genuinely vary across streamlines
    shape = (0.0, 0.0, 1.0, -2.0, 1.0)
    errs, hs = [], []
    for n in (17, 33, 65):
        geometry, boundary, bg = make_setup(
            a_up=tuple(5e-3 * c for c in shape),
            b_up=tuple(8e-3 * c for c in shape),
            wall_up=tuple(1e-2 * c for c in shape),
            background=background,
        )
        up, _, f_up, _, g_cd, _ = solved_layers(
            geometry, boundary, bg, n, lambda y: 1e-3 * y * (1.0 - y)
        )
        phys_up = rec.inverse_map(f_up, g_cd, geometry.wall_upper)
        errs.append(rec.streamline_transport_residual(phys_up))
        hs.append(up.grid.h_max)
    assert errs[0] > 0.0
    assert fit_order(hs, errs) >= 1.5, errs


def test_interface_is_streamline(background):
    geometry, boundary, bg = reference_setup(1e-2)
    up, lo, f_up, f_lo, g_cd, _ = solved_layers(
        geometry, boundary, bg, 33, lambda y: 1e-3 * y * (1.0 - y)
    )
    phys_up = rec.inverse_map(f_up, g_cd, geometry.wall_upper)
    phys_lo = rec.inverse_map(f_lo, g_cd, geometry.wall_lower)
    for phys in (phys_up, phys_lo):
        line = rec.trace_streamline(phys, 0.0)
        assert np.max(np.abs(line - g_cd)) <= 5e-5


def test_transport_exact_in_lagrangian_rows(background):
    geometry, boundary, bg = make_setup(
        a_up=(0.0, 0.0, 1e-3), b_up=(0.0, 0.0, 2e-3), background=background
    )
    _, _, f_up, _, _, _ = solved_layers(geometry, boundary, bg, 17)
    assert np.max(np.ptp(f_up.entropy, axis=0)) == 0.0
    assert np.max(np.ptp(f_up.bernoulli, axis=0)) == 0.0
