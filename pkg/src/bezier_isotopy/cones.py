"""Discrete derivatives, direction cones and the per-patch injectivity test."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bezier import BezierPatch, ControlNet, as_points
from .errors import DegenerateDerivative, DegenerateTriangle
from .mesh import TriMesh, grid_triangles

DEGENERATE_AXIS = 1e-9
DEGENERATE_AREA = 1e-14


def angle_between(a, b) -> np.ndarray:
    """Unsigned angle between vectors, via ``atan2(|a x b|, a . b)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.arctan2(np.linalg.norm(np.cross(a, b), axis=-1), np.sum(a * b, axis=-1))


@dataclass(frozen=True, eq=False)
class DirectionCone:
    axis: np.ndarray
    span: float

    def contains(self, vectors, tol: float = 1e-9) -> bool:
        vec = np.asarray(vectors, dtype=float).reshape(-1, 3)
        return bool(np.all(angle_between(self.axis, vec) <= 0.5 * self.span + tol))


def bounding_cone(vectors) -> DirectionCone:
    """Cone around the normalized mean direction containing every input vector.

    Not the minimal cone; when the mean nearly cancels the cone is the whole
    sphere (span ``2 pi``).
    """
    vec = np.asarray(vectors, dtype=float).reshape(-1, 3)
    unit = vec / np.linalg.norm(vec, axis=1, keepdims=True)
    mean = unit.mean(axis=0)
    norm = np.linalg.norm(mean)
    if norm < DEGENERATE_AXIS:
        return DirectionCone(np.array([0.0, 0.0, 1.0]), 2.0 * np.pi)
    axis = mean / norm
    return DirectionCone(axis, float(2.0 * angle_between(axis, unit).max()))


# -- discrete derivatives ----------------------------------------------------------

def discrete_derivative_grid(patch: BezierPatch):
    """Forward differences scaled to global parameters at every grid node.

    The last row (column) uses the backward difference.
    """
    pts = patch.net.points
    n, m = pts.shape[0] - 1, pts.shape[1] - 1
    du = np.diff(pts, axis=0) * (n / patch.width_u)
    dv = np.diff(pts, axis=1) * (m / patch.width_v)
    du = np.concatenate([du, du[-1:]], axis=0)
    dv = np.concatenate([dv, dv[:, -1:]], axis=1)
    return du, dv


def discrete_derivatives(patch: BezierPatch, i: int, j: int):
    n, m = patch.net.n, patch.net.m
    if not (0 <= i <= n and 0 <= j <= m):
        raise IndexError(f"grid index ({i}, {j}) outside {n + 1}x{m + 1} net")
    du, dv = discrete_derivative_grid(patch)
    return du[i, j], dv[i, j]


# -- cones -------------------------------------------------------------------------

def tangent_cones(patch):
    """Bounding cones of the normalized ``u``- and ``v``-differences of a net."""
    pts = as_points(patch)
    du = np.diff(pts, axis=0).reshape(-1, 3)
    dv = np.diff(pts, axis=1).reshape(-1, 3)
    for name, d in (("u", du), ("v", dv)):
        if np.any(np.linalg.norm(d, axis=1) == 0.0):
            raise DegenerateDerivative(f"zero-length {name}-difference in control net")
    return bounding_cone(du), bounding_cone(dv)


def patch_triangles(points) -> np.ndarray:
    """Triangles (as coordinates, ``(K, 3, 3)``) of a grid's control surface."""
    pts = np.asarray(points, dtype=float)
    index = np.arange(pts.shape[0] * pts.shape[1]).reshape(pts.shape[:2])
    return pts.reshape(-1, 3)[grid_triangles(index)]


def triangle_normals(tris) -> np.ndarray:
    tris = np.asarray(tris, dtype=float)
    cross = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    size = np.linalg.norm(cross, axis=1)
    longest = np.max(np.linalg.norm(tris - np.roll(tris, 1, axis=1), axis=2), axis=1)
    if np.any(size <= DEGENERATE_AREA * longest**2):
        raise DegenerateTriangle("triangle with (numerically) zero area")
    return cross / size[:, None]


def normal_cone(fragment) -> DirectionCone:
    """Bounding cone of the unit triangle normals of a mesh fragment.

    Accepts a :class:`TriMesh`, a net/patch (its control surface is used) or a
    raw ``(K, 3, 3)`` array of triangle vertex coordinates.
    """
    if isinstance(fragment, TriMesh):
        tris = fragment.positions[fragment.triangles]
    elif isinstance(fragment, (BezierPatch, ControlNet)):
        tris = patch_triangles(as_points(fragment))
    else:
        tris = np.asarray(fragment, dtype=float).reshape(-1, 3, 3)
    return bounding_cone(triangle_normals(tris))


@dataclass(frozen=True)
class InjectivityVerdict:
    cond_i: bool
    cond_ii: bool
    cond_iii: bool
    theta_n: float
    theta_u: float
    theta_v: float
    margins: tuple

    @property
    def passes(self) -> bool:
        return self.cond_i and self.cond_ii and self.cond_iii


def grid_conditions(points) -> InjectivityVerdict:
    """Evaluate the three cone conditions on a grid's control surface.

    Margins are ``cos(theta_n / 2)``, ``cos(theta_u / 2) - |a_n . a_u|`` and
    ``cos(theta_v / 2) - |a_n . a_v|``; each is positive exactly when its
    condition holds.
    """
    pts = as_points(points)
    cone_n = normal_cone_of_grid(pts)
    cone_u, cone_v = tangent_cones(pts)
    dot_u = abs(float(cone_n.axis @ cone_u.axis))
    dot_v = abs(float(cone_n.axis @ cone_v.axis))
    margins = (
        float(np.cos(0.5 * cone_n.span)),
        float(np.cos(0.5 * cone_u.span) - dot_u),
        float(np.cos(0.5 * cone_v.span) - dot_v),
    )
    return InjectivityVerdict(
        cond_i=bool(cone_n.span < np.pi),
        cond_ii=bool(margins[1] > 0.0),
        cond_iii=bool(margins[2] > 0.0),
        theta_n=float(cone_n.span),
        theta_u=float(cone_u.span),
        theta_v=float(cone_v.span),
        margins=margins,
    )


def normal_cone_of_grid(points) -> DirectionCone:
    return bounding_cone(triangle_normals(patch_triangles(points)))


def injectivity_conditions(patch: BezierPatch) -> InjectivityVerdict:
    return grid_conditions(patch.net.points)


def seam_pair_grids(stack) -> list:
    """Merged grids of patch pairs straddling the two seams of a closed surface.

    ``stack`` is the ``(A, B, n+1, m+1, 3)`` array of level patches.
    """
    A, B = stack.shape[:2]
    pairs = []
    for b in range(B):
        pairs.append(np.concatenate([stack[A - 1, b], stack[0, b][1:]], axis=0))
    for a in range(A):
        pairs.append(np.concatenate([stack[a, B - 1], stack[a, 0][:, 1:]], axis=1))
    return pairs
