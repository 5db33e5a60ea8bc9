"""Discrete and smooth total curvature, and the Gauss-Bonnet balances."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .bezier import as_points, classify_closedness, curve_derivative, derivative_at, derivative_grid
from .errors import DegenerateEdge, GeometryError, SingularMetric, SingularParametrization
from .mesh import TriMesh, VertexRole, control_mesh_at_level, topology

TWO_PI = 2.0 * math.pi
DEFAULT_QUAD_NODES = 64
QUADRATURE_TOL = 1e-8


def _angle(a, b):
    return np.arctan2(np.linalg.norm(np.cross(a, b), axis=-1), np.sum(a * b, axis=-1))


def corner_angles(mesh: TriMesh) -> np.ndarray:
    """Interior angle of every triangle at each of its three corners, ``(F, 3)``."""
    tris = mesh.positions[mesh.triangles]
    out = np.empty(mesh.triangles.shape)
    for k in range(3):
        p = tris[:, k]
        out[:, k] = _angle(tris[:, (k + 1) % 3] - p, tris[:, (k + 2) % 3] - p)
    return out


def vertex_angle_sums(mesh: TriMesh) -> np.ndarray:
    return np.bincount(mesh.triangles.reshape(-1), weights=corner_angles(mesh).reshape(-1),
                       minlength=mesh.num_vertices)


def angle_defect(mesh: TriMesh, vertex: int) -> float:
    """``2 pi`` minus the incident angles at an interior vertex."""
    if mesh.boundary_vertex_mask[vertex]:
        raise ValueError(f"vertex {vertex} is on the boundary; use boundary_exterior_angle")
    return float(TWO_PI - vertex_angle_sums(mesh)[vertex])


def boundary_exterior_angle(mesh: TriMesh, vertex: int) -> float:
    """``pi`` minus the incident angles at a boundary vertex (corners included)."""
    if not mesh.boundary_vertex_mask[vertex]:
        raise ValueError(f"vertex {vertex} is interior; use angle_defect")
    return float(math.pi - vertex_angle_sums(mesh)[vertex])


@dataclass(frozen=True)
class CurvatureReport:
    """Discrete sums for one mesh, optionally joined with smooth-side integrals.

    ``theorem2_residual`` compares the interior defect sum with
    ``int K dA + int (k_g - k) ds``; ``interior_residual`` compares it with
    ``int K dA`` alone, and ``corner_residual`` tracks the four corner
    exterior angles against their smooth counterparts.
    """

    interior_defect_sum: float
    boundary_exterior_sum: float
    euler_char: int
    closed: bool
    discrete_gb_residual: float
    corner_exterior_sum: float | None = None
    smooth_area_integral: float | None = None
    smooth_geodesic_integral: float | None = None
    smooth_curvature_integral: float | None = None
    corner_turning: float | None = None
    theorem2_residual: float | None = None
    interior_residual: float | None = None
    corner_residual: float | None = None


def discrete_gauss_bonnet(mesh: TriMesh) -> CurvatureReport:
    topo = topology(mesh)
    sums = vertex_angle_sums(mesh)
    bnd = mesh.boundary_vertex_mask
    interior = float(np.sum(TWO_PI - sums[~bnd]))
    boundary = float(np.sum(math.pi - sums[bnd]))
    corners = None
    if mesh.roles is not None and not topo.closed:
        is_corner = np.array([r is VertexRole.CORNER for r in mesh.roles])
        if is_corner.any():
            corners = float(np.sum(math.pi - sums[is_corner]))
    residual = interior + boundary - TWO_PI * topo.euler_char
    return CurvatureReport(interior, boundary, topo.euler_char, topo.closed, residual, corners)


def closed_balance(mesh: TriMesh) -> float:
    """``sum K(p) - 2 pi chi`` for a closed mesh."""
    report = discrete_gauss_bonnet(mesh)
    if not report.closed:
        raise ValueError("mesh has a boundary")
    return report.discrete_gb_residual


# -- curves --------------------------------------------------------------------------

def polygon_total_curvature(points, closed: bool = False) -> float:
    """Sum of exterior angles between consecutive edges of a polyline.

    For a closed polygon a repeated first point at the end is dropped.
    """
    pts = np.asarray(points, dtype=float)
    if closed and len(pts) > 1 and np.array_equal(pts[0], pts[-1]):
        pts = pts[:-1]
    if len(pts) < 3:
        raise ValueError("need at least three points")
    edges = np.diff(np.vstack([pts, pts[:1]]) if closed else pts, axis=0)
    if np.any(np.all(edges == 0.0, axis=1)):
        raise DegenerateEdge("repeated consecutive points")
    nxt = np.roll(edges, -1, axis=0) if closed else edges[1:]
    cur = edges if closed else edges[:-1]
    return float(np.sum(_angle(cur, nxt)))


def gauss_legendre(nodes: int):
    """Gauss-Legendre nodes and weights on ``[0, 1]``."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    return 0.5 * (x + 1.0), 0.5 * w


def _inflections(points) -> np.ndarray:
    """Parameters in ``(0, 1)`` where ``|gamma' x gamma''|`` has a local minimum.

    At a zero the integrand ``|gamma' x gamma''|`` has a kink, and near a small
    minimum it varies on a short scale, so the quadrature is split there.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts) - 1
    if n < 2:
        return np.zeros(0)
    count = 4 * n
    t = 0.5 - 0.5 * np.cos(np.pi * (np.arange(count) + 0.5) / count)
    c = np.cross(curve_derivative(pts, t, 1), curve_derivative(pts, t, 2))
    size2 = np.sum(c * c, axis=-1)
    if size2.max() == 0.0:
        return np.zeros(0)
    # |c|^2 is a polynomial of degree at most 4n - 8, so the fit is exact
    series = np.polynomial.Chebyshev.fit(t, size2, count - 1, domain=[0.0, 1.0])
    roots = series.deriv().roots()
    roots = np.unique(roots[np.isreal(roots)].real)
    roots = roots[(roots > 1e-12) & (roots < 1.0 - 1e-12)]
    if not len(roots):
        return roots
    return roots[series.deriv(2)(roots) >= 0.0]


def composite_rule(breaks, nodes: int):
    """Gauss-Legendre with ``nodes`` points on each piece of ``[0, 1]`` cut at ``breaks``."""
    edges = np.concatenate([[0.0], np.sort(breaks), [1.0]])
    x, w = gauss_legendre(nodes)
    width = np.diff(edges)
    return (edges[:-1, None] + width[:, None] * x).ravel(), (width[:, None] * w).ravel()


def curve_curvature_integral(points, nodes: int = DEFAULT_QUAD_NODES) -> float:
    """``int kappa ds`` of a Bezier curve by Gauss-Legendre quadrature.

    The rule is split at inflections, where the integrand is not smooth.
    """
    t, w = composite_rule(_inflections(points), nodes)
    d1 = curve_derivative(points, t, 1)
    d2 = curve_derivative(points, t, 2)
    speed2 = np.sum(d1 * d1, axis=1)
    if np.any(speed2 == 0.0):
        raise SingularParametrization("curve derivative vanishes at a quadrature node")
    return float(np.sum(w * np.linalg.norm(np.cross(d1, d2), axis=1) / speed2))


def curve_hodograph_length(points, nodes: int = DEFAULT_QUAD_NODES) -> float:
    """Arc length of the derivative curve, ``int |gamma''| dt``."""
    t, w = gauss_legendre(nodes)
    return float(np.sum(w * np.linalg.norm(curve_derivative(points, t, 2), axis=1)))


# -- smooth side -------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryIntegrals:
    curvature: float
    geodesic: float
    corner_turning: float


def _boundary_sides(pts):
    """The four boundary curves, counterclockwise in parameter space.

    Each entry is ``(control points, map t -> (u, v))``.
    """
    return [
        (pts[:, 0], lambda t: (t, np.zeros_like(t))),
        (pts[-1, :], lambda t: (np.ones_like(t), t)),
        (pts[::-1, -1], lambda t: (1.0 - t, np.ones_like(t))),
        (pts[0, ::-1], lambda t: (np.zeros_like(t), 1.0 - t)),
    ]


def _unit_normal_at(pts, us, vs):
    n = np.cross(derivative_at(pts, us, vs, 1, 0), derivative_at(pts, us, vs, 0, 1))
    size = np.linalg.norm(n, axis=1)
    if np.any(size == 0.0):
        raise SingularMetric("surface normal undefined on the boundary")
    return n / size[:, None]


def smooth_boundary_integrals(net, quad_points: int = DEFAULT_QUAD_NODES) -> BoundaryIntegrals:
    """``int kappa ds``, ``int kappa_g ds`` and the corner turning ``T_kappa``.

    The boundary runs counterclockwise in parameter space and ``kappa_g`` is
    signed against the normal ``b_u x b_v``.
    """
    if quad_points < 16:
        raise ValueError("at least 16 quadrature points are required")
    pts = as_points(net)
    if classify_closedness(pts).closed:
        raise ValueError("boundary integrals need an open surface")
    total_k = total_kg = 0.0
    ends = []
    for ctrl, param in _boundary_sides(pts):
        t, w = composite_rule(_inflections(ctrl), quad_points)
        d1 = curve_derivative(ctrl, t, 1)
        d2 = curve_derivative(ctrl, t, 2)
        speed2 = np.sum(d1 * d1, axis=1)
        if np.any(speed2 == 0.0):
            raise SingularParametrization("boundary curve derivative vanishes at a quadrature node")
        cross = np.cross(d1, d2)
        normal = _unit_normal_at(pts, *param(t))
        total_k += float(np.sum(w * np.linalg.norm(cross, axis=1) / speed2))
        total_kg += float(np.sum(w * np.sum(cross * normal, axis=1) / speed2))
        ends.append((curve_derivative(ctrl, [0.0], 1)[0], curve_derivative(ctrl, [1.0], 1)[0]))
    turning = 0.0
    for k in range(4):
        incoming = ends[k - 1][1]
        outgoing = ends[k][0]
        if not (np.any(incoming) and np.any(outgoing)):
            raise SingularParametrization("boundary tangent vanishes at a corner")
        turning += float(_angle(incoming, outgoing))
    return BoundaryIntegrals(total_k, total_kg, turning)


def smooth_area_integral(net, grid: int = DEFAULT_QUAD_NODES) -> float:
    """``int K dA`` by tensor Gauss-Legendre quadrature of ``K sqrt(EG - F^2)``."""
    pts = as_points(net)
    t, w = gauss_legendre(grid)
    bu = derivative_grid(pts, t, t, 1, 0)
    bv = derivative_grid(pts, t, t, 0, 1)
    buu = derivative_grid(pts, t, t, 2, 0)
    buv = derivative_grid(pts, t, t, 1, 1)
    bvv = derivative_grid(pts, t, t, 0, 2)
    normal = np.cross(bu, bv)
    metric = np.sum(normal * normal, axis=-1)  # EG - F^2
    scale = np.max(np.sum(bu * bu, axis=-1)) * np.max(np.sum(bv * bv, axis=-1))
    if np.any(metric <= 1e-14 * scale):
        raise SingularMetric("EG - F^2 vanishes at a quadrature node")
    L = np.sum(buu * normal, axis=-1)
    M = np.sum(buv * normal, axis=-1)
    N = np.sum(bvv * normal, axis=-1)
    # K dA = (LN - M^2) / (EG - F^2) * sqrt(EG - F^2) with unnormalized L, M, N
    integrand = (L * N - M * M) / metric**1.5
    return float(w @ integrand @ w)


@dataclass(frozen=True)
class SmoothSide:
    area: float
    geodesic: float
    curvature: float
    corner_turning: float


class QuadratureWarning(UserWarning):
    """Doubling the quadrature nodes moved a smooth integral by more than the tolerance."""


def _smooth_side_raw(pts, quad_nodes):
    bi = smooth_boundary_integrals(pts, quad_nodes)
    return SmoothSide(smooth_area_integral(pts, quad_nodes), bi.geodesic, bi.curvature, bi.corner_turning)


def quadrature_drift(net, quad_nodes: int = DEFAULT_QUAD_NODES) -> float:
    """Largest change in any smooth integral when the node count is doubled."""
    a, b = smooth_side(net, quad_nodes, check=False), smooth_side(net, 2 * quad_nodes, check=False)
    return max(abs(x - y) for x, y in zip(vars(a).values(), vars(b).values()))


@lru_cache(maxsize=64)
def _smooth_side_cached(key, shape, quad_nodes):
    return _smooth_side_raw(np.frombuffer(key).reshape(shape), quad_nodes)


def smooth_side(net, quad_nodes: int = DEFAULT_QUAD_NODES, check: bool = True) -> SmoothSide:
    """Level-independent smooth integrals of an open surface (cached).

    With ``check`` the integrals are recomputed at twice the nodes and a
    :class:`QuadratureWarning` is issued if they move by more than ``1e-8``.
    """
    pts = np.ascontiguousarray(as_points(net), dtype=float)
    side = _smooth_side_cached(pts.tobytes(), pts.shape, quad_nodes)
    if check:
        drift = quadrature_drift(pts, quad_nodes)
        if drift > QUADRATURE_TOL:
            warnings.warn(f"smooth integrals not converged at {quad_nodes} nodes (drift {drift:.2e})",
                          QuadratureWarning, stacklevel=2)
    return side


def curvature_report(mesh: TriMesh, net=None, quad_nodes: int = DEFAULT_QUAD_NODES) -> CurvatureReport:
    """Discrete report, joined with the smooth side when ``net`` is an open surface."""
    report = discrete_gauss_bonnet(mesh)
    if net is None or report.closed:
        return report
    smooth = smooth_side(net, quad_nodes)
    theorem2 = abs(report.interior_defect_sum - (smooth.area + smooth.geodesic - smooth.curvature))
    corner_res = None
    if report.corner_exterior_sum is not None:
        corner_res = abs(report.corner_exterior_sum - smooth.corner_turning)
    return CurvatureReport(
        report.interior_defect_sum, report.boundary_exterior_sum, report.euler_char, report.closed,
        report.discrete_gb_residual, report.corner_exterior_sum,
        smooth.area, smooth.geodesic, smooth.curvature, smooth.corner_turning,
        theorem2, abs(report.interior_defect_sum - smooth.area), corner_res)


def theorem2_residual(net, level: int, quad_nodes: int = DEFAULT_QUAD_NODES) -> float:
    """``|sum_int K(p) - (int K dA + int (k_g - k) ds)|`` at subdivision ``level``."""
    pts = as_points(net)
    if classify_closedness(pts).closed:
        raise ValueError("the interior curvature balance applies to open surfaces only")
    return curvature_report(control_mesh_at_level(pts, level), pts, quad_nodes).theorem2_residual


def theorem3_check(net, level: int) -> float:
    """``sum K(p) - 2 pi chi`` over the closed control surface at ``level``."""
    pts = as_points(net)
    if not classify_closedness(pts).closed:
        raise ValueError("the closed curvature balance applies to closed surfaces only")
    mesh = control_mesh_at_level(pts, level)
    if not topology(mesh).closed:
        raise GeometryError("closed net produced a mesh with boundary")
    return closed_balance(mesh)
