import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy.spatial.transform import Rotation

from bezier_isotopy.errors import DegenerateTriangle
from bezier_isotopy.intersect import (IntersectionKind, Verdict, hausdorff_distance, isotopy_certificate,
                                      self_intersections, tri_tri_intersect)
from bezier_isotopy.mesh import TriMesh, control_mesh_at_level, triangulate_net
from bezier_isotopy.nets import SUITE, folded_sheet_net, tangled_torus_net, flat_net, torus_net, wavy_net

T = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)


def _barycentric_inside(tri, p, tol=1e-9):
    a, b, c = tri
    m = np.column_stack([b - a, c - a])
    coef, *_ = np.linalg.lstsq(m, p - a, rcond=None)
    lam = np.array([1 - coef.sum(), *coef])
    return np.all(lam >= -tol) and np.linalg.norm(m @ coef + a - p) <= tol


def test_parallel_planes():
    assert tri_tri_intersect(T, T + [0, 0, 1]) is None


def test_cell_neighbours_are_not_reported():
    mesh = triangulate_net(flat_net(1, 1))
    t1, t2 = mesh.positions[mesh.triangles]
    assert tri_tri_intersect(t1, t2) is None
    assert self_intersections(mesh) == []


def test_piercing_triangle():
    other = np.array([[0.2, 0.2, -1], [0.3, 0.25, 1], [2, 2, 0.5]], dtype=float)
    hit = tri_tri_intersect(T, other)
    assert hit.kind is IntersectionKind.PROPER_CROSSING
    w = np.array(hit.witness)
    assert _barycentric_inside(T, w) and _barycentric_inside(other, w)


def test_coplanar_overlap():
    hit = tri_tri_intersect(T, T + [0.2, 0.2, 0.0])
    assert hit.kind is IntersectionKind.COPLANAR_OVERLAP
    assert tri_tri_intersect(T, T + [2.0, 0.0, 0.0]) is None
    crossing = np.array([[0.5, -1, 0], [0.5, 2, 0], [3, 3, 0]], dtype=float)
    assert tri_tri_intersect(T, crossing).kind is IntersectionKind.COPLANAR_OVERLAP


def test_touching_is_within_tolerance():
    touching = np.array([[1, 0, 0], [2, 0, 0], [2, 1, 0]], dtype=float) + [1e-6, 0, 0]
    assert tri_tri_intersect(T, touching) is None
    edge_touch = np.array([[0.5, 0.5, 0], [1, 1, 1], [1, 1, -1]], dtype=float)
    assert tri_tri_intersect(T, edge_touch) is not None


def test_degenerate_triangle():
    with pytest.raises(DegenerateTriangle):
        tri_tri_intersect(T, [[0, 0, 1], [1, 0, 1], [2, 0, 1]])


triangles = arrays(np.float64, (3, 3), elements=st.floats(-2, 2, allow_nan=False)).filter(
    lambda t: np.linalg.norm(np.cross(t[1] - t[0], t[2] - t[0])) > 1e-2)


@given(triangles, triangles)
def test_symmetry(a, b):
    h1, h2 = tri_tri_intersect(a, b), tri_tri_intersect(b, a)
    assert (h1 is None) == (h2 is None)
    if h1 is not None:
        assert h1.kind == h2.kind


@given(triangles, triangles, st.integers(0, 2**31))
def test_rigid_motion_invariance(a, b, seed):
    rot = Rotation.random(random_state=seed).as_matrix()
    shift = np.random.default_rng(seed).normal(size=3)
    before = tri_tri_intersect(a, b)
    after = tri_tri_intersect(a @ rot.T + shift, b @ rot.T + shift)
    # verdicts may only differ for configurations within the tolerance band
    if (before is None) != (after is None):
        assert tri_tri_intersect(a, b, eps=1e-6) is not None


def test_flat_grid_is_embedded():
    assert self_intersections(control_mesh_at_level(flat_net(3, 3), 2)) == []


def test_folded_and_tangled_nets():
    hits = self_intersections(triangulate_net(folded_sheet_net()))
    assert hits and all(r.tri_a < r.tri_b for r in hits)
    mesh = triangulate_net(folded_sheet_net())
    for r in hits:
        assert not set(mesh.triangles[r.tri_a]) & set(mesh.triangles[r.tri_b])
    assert self_intersections(control_mesh_at_level(folded_sheet_net(), 2)) == []
    assert self_intersections(triangulate_net(tangled_torus_net()))
    assert self_intersections(control_mesh_at_level(tangled_torus_net(), 3)) == []


@pytest.mark.parametrize("name,level", [("folded_sheet", 0), ("tangled_torus", 0), ("tangled_torus", 1), ("torus", 1), ("wavy", 2)])
def test_grid_pruning_matches_brute_force(name, level):
    mesh = control_mesh_at_level(SUITE[name](), level)
    grid = {(r.tri_a, r.tri_b) for r in self_intersections(mesh, method="grid")}
    brute = {(r.tri_a, r.tri_b) for r in self_intersections(mesh, method="brute")}
    assert grid == brute


def test_seam_neighbours_are_excluded():
    assert self_intersections(control_mesh_at_level(torus_net(), 3)) == []


def test_hausdorff_examples():
    planar = flat_net(1, 1)
    assert hausdorff_distance(triangulate_net(planar), planar) <= 1e-12
    # a twisted bilinear net is a hyperbolic paraboloid, not its two triangles
    twisted = planar.copy()
    twisted[1, 1, 2] = 1.0
    # |uv - v| peaks at u = v = 1/2, which 33 samples include
    assert hausdorff_distance(triangulate_net(twisted), twisted, 33) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(ValueError):
        hausdorff_distance(triangulate_net(planar), planar, samples=16)


def test_hausdorff_interpolates_at_corner_knots():
    pts = wavy_net()
    mesh = triangulate_net(pts)
    d = hausdorff_distance(mesh, pts)
    assert d > 0.0


def test_hausdorff_rate_and_sampling():
    pts = wavy_net()
    d = [hausdorff_distance(control_mesh_at_level(pts, k), pts) for k in range(6)]
    assert all(d[k + 1] / d[k] <= 0.5 for k in range(1, 5))
    for name in ["wavy", "saddle", "dome", "folded_sheet"]:
        mesh = control_mesh_at_level(SUITE[name](), 1)
        a = hausdorff_distance(mesh, SUITE[name](), 32)
        b = hausdorff_distance(mesh, SUITE[name](), 64)
        assert abs(b - a) <= 0.05 * b


@given(st.integers(0, 2**31))
def test_hausdorff_rigid_motion_invariance(seed):
    pts = wavy_net()
    rot = Rotation.random(random_state=seed).as_matrix()
    moved = pts @ rot.T + np.random.default_rng(seed).normal(size=3)
    a = hausdorff_distance(control_mesh_at_level(pts, 1), pts)
    b = hausdorff_distance(control_mesh_at_level(moved, 1), moved)
    assert abs(a - b) <= 1e-9


def test_certificate_examples():
    flat = isotopy_certificate(flat_net(3, 3), 0)
    assert flat.verdict is Verdict.CERTIFIED and flat.hausdorff <= 1e-12
    first = isotopy_certificate(folded_sheet_net(), 0)
    assert first.verdict is Verdict.NOT_YET and not first.oracle_clear
    torus = [isotopy_certificate(torus_net(), k).verdict for k in range(5)]
    assert Verdict.CERTIFIED in torus


def test_certificate_invariant():
    for name, level in [("folded_sheet", 0), ("folded_sheet", 1), ("torus", 2), ("torus", 3), ("dome", 0)]:
        c = isotopy_certificate(SUITE[name](), level)
        assert (c.verdict is Verdict.CERTIFIED) == (c.conditions_pass and c.oracle_clear and c.topology_match)
