import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bezier_isotopy.bezier import curve_derivative, subdivide_curve, subdivide_grid
from bezier_isotopy.curvature import (QuadratureWarning, angle_defect, boundary_exterior_angle, corner_angles,
                                      curvature_report, curve_curvature_integral, curve_hodograph_length,
                                      discrete_gauss_bonnet, polygon_total_curvature, quadrature_drift,
                                      smooth_area_integral, smooth_boundary_integrals, smooth_side,
                                      theorem2_residual, theorem3_check)
from bezier_isotopy.errors import DegenerateEdge
from bezier_isotopy.mesh import control_mesh_at_level, triangulate_net
from bezier_isotopy.nets import (SUITE, cube_mesh, tangled_torus_net, flat_net, saddle_net, skew_bump_net,
                                 sphere_sixth_net, torus_net, wavy_net)

OPEN_SUITE = ["flat", "folded_sheet", "saddle", "skew_bump", "wavy", "dome"]


def _vertex(mesh, i, j):
    return int(mesh.grid[i, j])


# -- angles ------------------------------------------------------------------------------

def test_flat_grid_angles():
    mesh = triangulate_net(flat_net(3, 3))
    assert abs(angle_defect(mesh, _vertex(mesh, 1, 1))) <= 1e-12
    assert abs(boundary_exterior_angle(mesh, _vertex(mesh, 0, 1))) <= 1e-12
    assert boundary_exterior_angle(mesh, _vertex(mesh, 0, 0)) == pytest.approx(math.pi / 2, abs=1e-12)
    assert boundary_exterior_angle(mesh, _vertex(mesh, 3, 0)) == pytest.approx(math.pi / 2, abs=1e-12)
    with pytest.raises(ValueError):
        angle_defect(mesh, _vertex(mesh, 0, 0))
    with pytest.raises(ValueError):
        boundary_exterior_angle(mesh, _vertex(mesh, 1, 1))
    report = discrete_gauss_bonnet(mesh)
    assert abs(report.interior_defect_sum) <= 1e-12
    assert report.boundary_exterior_sum == pytest.approx(2 * math.pi, abs=1e-12)


def test_cube_oracle():
    cube = cube_mesh()
    for v in range(8):
        assert angle_defect(cube, v) == pytest.approx(math.pi / 2, abs=1e-15)
    report = discrete_gauss_bonnet(cube)
    assert abs(report.interior_defect_sum - 4 * math.pi) <= 1e-12
    assert report.euler_char == 2 and abs(report.discrete_gb_residual) <= 1e-12


def test_angles_are_in_open_interval():
    for name in OPEN_SUITE:
        angles = corner_angles(control_mesh_at_level(SUITE[name](), 1))
        assert np.all((angles > 0.0) & (angles < math.pi))


@pytest.mark.parametrize("name", OPEN_SUITE)
@pytest.mark.parametrize("level", range(5))
def test_open_gauss_bonnet_identity(name, level):
    report = discrete_gauss_bonnet(control_mesh_at_level(SUITE[name](), level))
    assert abs(report.interior_defect_sum + report.boundary_exterior_sum - 2 * math.pi) <= 1e-8


@given(st.integers(0, 2**31), st.floats(1e-3, 0.3))
def test_closed_identity_survives_perturbation(seed, size):
    pts = torus_net()
    noise = np.random.default_rng(seed).normal(scale=size, size=pts.shape)
    noise[-1] = noise[0]
    noise[:, -1] = noise[:, 0]
    assert abs(theorem3_check(pts + noise, 1)) <= 1e-8


def test_theorem3_examples():
    for level in range(4):
        assert abs(theorem3_check(torus_net(), level)) <= 1e-8
        assert abs(theorem3_check(tangled_torus_net(), level)) <= 1e-8
    with pytest.raises(ValueError):
        theorem3_check(wavy_net(), 0)
    with pytest.raises(ValueError):
        theorem2_residual(torus_net(), 1)


# -- polygons and curves --------------------------------------------------------------------

def test_polygon_examples():
    square = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)
    assert polygon_total_curvature(square, closed=True) == pytest.approx(2 * math.pi, abs=1e-12)
    assert polygon_total_curvature(np.vstack([square, square[:1]]), closed=True) == pytest.approx(2 * math.pi)
    assert polygon_total_curvature([[0, 0, 0], [1, 1, 1], [3, 3, 3]]) == 0.0
    with pytest.raises(DegenerateEdge):
        polygon_total_curvature([[0, 0, 0], [0, 0, 0], [1, 0, 0]])


def test_quadratic_curve_exact_turning():
    # a convex planar curve turns by the angle between its end tangents
    curve = np.array([[0, 0, 0], [1, 2, 0], [3, 0, 0]], dtype=float)
    exact = math.atan2(2, 1) + math.atan2(2, 2)
    assert curve_curvature_integral(curve) == pytest.approx(exact, abs=1e-13)
    totals = [polygon_total_curvature(subdivide_curve(curve, k)) for k in range(6)]
    # for convex planar arcs every control polygon already turns by the same total
    assert totals == pytest.approx([exact] * 6, abs=1e-12)


def test_spatial_curve_polygon_converges():
    curve = np.array([[0, 0, 0], [1, 2, 0], [2, -1, 1], [3, 1, 2]], dtype=float)
    q = curve_curvature_integral(curve)
    assert q == pytest.approx(curve_curvature_integral(curve, 128), abs=1e-12)
    errs = [abs(polygon_total_curvature(subdivide_curve(curve, k)) - q) for k in range(8)]
    assert all(b < a for a, b in zip(errs, errs[1:]))
    assert errs[-1] < 1e-3


def test_inflection_split_quadrature():
    curve = wavy_net()[:, 0]
    assert curve_curvature_integral(curve, 16) == pytest.approx(curve_curvature_integral(curve, 256), abs=1e-12)
    spatial = np.array([[0, 0, 0], [1, 2, 0], [2, -1, 1], [3, 1, 2]], dtype=float)
    assert curve_curvature_integral(spatial, 32) == pytest.approx(curve_curvature_integral(spatial, 256), abs=1e-12)


def test_boundary_polygons_are_variation_diminishing():
    for name in OPEN_SUITE:
        pts = SUITE[name]()
        for side in (pts[:, 0], pts[:, -1], pts[0], pts[-1]):
            totals = [polygon_total_curvature(subdivide_curve(side, k)) for k in range(6)]
            assert all(b <= a + 1e-12 for a, b in zip(totals, totals[1:])), name


def test_derivative_polygon_length_converges():
    curve = wavy_net()[:, 1]
    target = curve_hodograph_length(curve)
    errs = []
    for level in range(1, 7):
        pieces = subdivide_curve(curve, level)
        n = len(curve) - 1
        count = 2**level
        # discrete derivatives of every piece, in the global parameter
        hodo = n * count * np.diff(pieces, axis=0)
        segs = [hodo[k * n:(k + 1) * n] for k in range(count)]
        length = sum(np.linalg.norm(np.diff(s, axis=0), axis=1).sum() for s in segs)
        errs.append(abs(length - target))
    assert all(b < a for a, b in zip(errs, errs[1:]))


# -- smooth side ---------------------------------------------------------------------------

def test_planar_square_boundary():
    bi = smooth_boundary_integrals(flat_net(3, 3))
    assert bi.curvature == 0.0 and bi.geodesic == 0.0
    assert bi.corner_turning == pytest.approx(2 * math.pi, abs=1e-14)
    assert abs(smooth_area_integral(flat_net(3, 3))) <= 1e-12


def test_planar_curved_boundary_geodesic_equals_curvature():
    pts = flat_net(3, 3)
    pts[1:3, 0, 1] -= 0.3  # bulge the v = 0 side outward
    side = smooth_side(pts)
    # planar and convex: kappa_g = kappa pointwise, and Gauss-Bonnet closes with K = 0
    assert side.curvature > 0.1
    assert side.geodesic == pytest.approx(side.curvature, abs=1e-12)
    assert abs(side.area) <= 1e-12
    assert side.area + side.geodesic + side.corner_turning == pytest.approx(2 * math.pi, abs=1e-12)


@pytest.mark.parametrize("name", OPEN_SUITE)
def test_smooth_gauss_bonnet(name):
    side = smooth_side(SUITE[name]())
    assert side.area + side.geodesic + side.corner_turning == pytest.approx(2 * math.pi, abs=1e-7)


@pytest.mark.parametrize("name", ["saddle", "skew_bump", "wavy"])
def test_quadrature_self_convergence(name):
    assert quadrature_drift(SUITE[name](), 32) <= 1e-9
    assert quadrature_drift(SUITE[name](), 64) <= 1e-8


def test_unconverged_quadrature_warns():
    pts = SUITE["folded_sheet"]()
    with pytest.warns(QuadratureWarning):
        smooth_side(pts, 16)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        smooth_side(pts, 64)


def test_sphere_sixth_area_integral():
    pts = sphere_sixth_net()
    total = smooth_area_integral(pts)
    # a sixth of the unit sphere carries 4 pi / 6; the fitted patch is within its fit error
    assert total == pytest.approx(4 * math.pi / 6, rel=0.02)
    assert total == pytest.approx(smooth_area_integral(pts, 128), abs=1e-12)
    res = [curvature_report(control_mesh_at_level(pts, k), pts).interior_residual for k in range(1, 6)]
    assert all(b < a for a, b in zip(res, res[1:]))


# -- theorem 2 ------------------------------------------------------------------------------

def test_planar_residual_vanishes():
    for level in range(4):
        assert theorem2_residual(flat_net(3, 3), level) <= 1e-10


@pytest.mark.parametrize("net", [saddle_net, skew_bump_net], ids=["saddle", "skew_bump"])
def test_residual_decreases_on_straight_boundary_patches(net):
    res = [theorem2_residual(net(), k) for k in range(1, 6)]
    assert all(b < a for a, b in zip(res, res[1:]))
    assert res[-1] <= 1e-2


def test_report_fields():
    pts = wavy_net()
    r = curvature_report(control_mesh_at_level(pts, 2), pts)
    side = smooth_side(pts)
    assert r.smooth_area_integral == side.area
    assert r.theorem2_residual == pytest.approx(
        abs(r.interior_defect_sum - (side.area + side.geodesic - side.curvature)), abs=1e-15)
    assert r.corner_residual < 1e-2
    closed = curvature_report(control_mesh_at_level(torus_net(), 1), torus_net())
    assert closed.closed and closed.smooth_area_integral is None
