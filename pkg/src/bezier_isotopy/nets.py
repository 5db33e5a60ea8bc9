"""Reference control nets used by the test suite, the CLI and the examples.

All constructors return plain ``(n + 1, m + 1, 3)`` arrays.
"""

from __future__ import annotations

import numpy as np

from .bezier import bernstein_basis
from .mesh import TriMesh

# rounded-square closed loop of degree 5; starts mid-edge so the seam is G1
ROUNDED_SQUARE = np.array([[1, 0], [1, 1], [-1, 1], [-1, -1], [1, -1], [1, 0]], dtype=float)

# closed loop whose control polygon crosses itself while the curve winds once
# around the origin with strictly increasing polar angle
CROSSED_LOOP = np.array(
    [[1.0, 0.0], [1.4, 1.2], [-1.6, 0.2], [0.2, 1.6], [-1.5, -1.5], [1.5, -1.4], [1.0, 0.0]])

# open cubic whose control polygon crosses itself; the curve is x-monotone
CROSSED_CUBIC = np.array([[0.0, 0.0], [2.0, 1.0], [0.9, 1.0], [2.0, 0.0]])


def flat_net(n: int = 3, m: int = 3, width: float = 1.0, height: float = 1.0) -> np.ndarray:
    """Uniform planar grid; its surface and control surface coincide."""
    i, j = np.meshgrid(np.linspace(0, width, n + 1), np.linspace(0, height, m + 1), indexing="ij")
    return np.stack([i, j, np.zeros_like(i)], axis=-1)


def bilinear_net(p00, p10, p01, p11) -> np.ndarray:
    return np.array([[p00, p01], [p10, p11]], dtype=float)


def _elevate(points, n: int, m: int) -> np.ndarray:
    """Degree-elevate a net to degrees ``(n, m)`` by exact least squares."""
    pts = np.asarray(points, dtype=float)
    us = np.linspace(0.0, 1.0, 3 * max(n, pts.shape[0]) + 1)
    vs = np.linspace(0.0, 1.0, 3 * max(m, pts.shape[1]) + 1)
    samples = np.einsum("ai,ijk,bj->abk", bernstein_basis(pts.shape[0] - 1, us), pts,
                        bernstein_basis(pts.shape[1] - 1, vs))
    return _fit_net(samples, us, vs, n, m)


def _fit_net(samples, us, vs, n: int, m: int) -> np.ndarray:
    """Least-squares Bezier net of degrees ``(n, m)`` through gridded samples."""
    bu = bernstein_basis(n, us)
    bv = bernstein_basis(m, vs)
    pinv_u = np.linalg.pinv(bu)
    pinv_v = np.linalg.pinv(bv)
    return np.einsum("ia,abk,jb->ijk", pinv_u, samples, pinv_v)


def torus_net(main=ROUNDED_SQUARE, tube=ROUNDED_SQUARE, major: float = 3.0, minor: float = 1.0) -> np.ndarray:
    """Closed net swept by a closed planar ``main`` loop and a ``tube`` cross-section.

    ``p_ij = (major + minor * tube_j.x) * (main_i, 0) + (0, 0, minor * tube_j.y)``.
    The form is bilinear in the two loops, so the surface is the same sweep of
    the two Bezier loops. First and last rows/columns are equal by construction.
    """
    main = np.asarray(main, dtype=float)
    tube = np.asarray(tube, dtype=float)
    radial = major + minor * tube[:, 0]
    pts = np.zeros((len(main), len(tube), 3))
    pts[..., 0] = main[:, None, 0] * radial[None, :]
    pts[..., 1] = main[:, None, 1] * radial[None, :]
    pts[..., 2] = minor * tube[None, :, 1]
    return pts


def tangled_torus_net() -> np.ndarray:
    """Closed torus whose level-0 control surface passes through itself."""
    return torus_net(CROSSED_LOOP, ROUNDED_SQUARE, major=1.0, minor=0.15)


def folded_sheet_net(layers: int = 3, depth: float = 1.0, bend: float = 0.3) -> np.ndarray:
    """Open sheet over a crossed cubic: embedded surface, folded control surface."""
    pts = np.zeros((4, layers + 1, 3))
    for j in range(layers + 1):
        s = j / layers
        pts[:, j, 0] = CROSSED_CUBIC[:, 0]
        pts[:, j, 1] = CROSSED_CUBIC[:, 1] + bend * s * (1.0 - s)
        pts[:, j, 2] = depth * s
    return pts


def saddle_net(degree: int = 3, twist: float = 0.5) -> np.ndarray:
    """Hyperbolic paraboloid through a skew quadrilateral, degree-elevated.

    Its boundary curves are straight segments.
    """
    quad = bilinear_net([0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, twist])
    return _elevate(quad, degree, degree)


def skew_bump_net() -> np.ndarray:
    """Bicubic over a skew quadrilateral with straight sides and a raised middle."""
    corners = bilinear_net([0, 0, 0], [1.2, 0, 0.1], [0, 1, 0.2], [1, 1.1, 0.0])
    pts = _elevate(corners, 3, 3)
    pts[1:3, 1:3, 2] += np.array([[0.1, 0.06], [0.08, 0.12]])
    return pts


def wavy_net() -> np.ndarray:
    """Generic non-flat bicubic with curved boundaries."""
    pts = flat_net(3, 3)
    pts[..., 2] = np.array([[0.0, 0.3, -0.2, 0.1],
                            [0.2, 0.6, 0.4, -0.1],
                            [-0.1, 0.5, 0.7, 0.2],
                            [0.1, -0.2, 0.3, 0.0]])
    pts[1, 2, 0] += 0.1
    pts[2, 1, 1] -= 0.1
    return pts


def sphere_cap_net(half_angle: float, radius: float = 1.0, degree: int = 4) -> np.ndarray:
    """Least-squares patch over the equal-angle cube-face region of a sphere.

    Parameter ``(s, t)`` maps to the direction ``(tan(a s), tan(a t), 1)``
    for ``s, t`` in ``[-1, 1]`` and ``a = half_angle``.
    """
    us = np.linspace(0.0, 1.0, 41)
    s, t = np.meshgrid(half_angle * (2 * us - 1), half_angle * (2 * us - 1), indexing="ij")
    v = np.stack([np.tan(s), np.tan(t), np.ones_like(s)], axis=-1)
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    return _fit_net(radius * v, us, us, degree, degree)


def dome_net() -> np.ndarray:
    """Nearly a hemisphere; its level-0 normal cone is wider than a half-space."""
    return sphere_cap_net(np.radians(70.0), degree=6)


def sphere_sixth_net(radius: float = 1.0, degree: int = 4) -> np.ndarray:
    """One cube-face sixth of a sphere."""
    return sphere_cap_net(np.pi / 4, radius, degree)


def cube_mesh() -> TriMesh:
    """Unit cube surface, 8 vertices and 12 outward-facing triangles."""
    verts = np.array([[x, y, z] for x in (0, 1) for y in (0, 1) for z in (0, 1)], dtype=float)
    faces = [
        (0, 1, 3), (0, 3, 2),  # x = 0
        (4, 6, 7), (4, 7, 5),  # x = 1
        (0, 4, 5), (0, 5, 1),  # y = 0
        (2, 3, 7), (2, 7, 6),  # y = 1
        (0, 2, 6), (0, 6, 4),  # z = 0
        (1, 5, 7), (1, 7, 3),  # z = 1
    ]
    return TriMesh(verts, faces)


SUITE = {
    "flat": flat_net,
    "torus": torus_net,
    "folded_sheet": folded_sheet_net,
    "tangled_torus": tangled_torus_net,
    "saddle": saddle_net,
    "skew_bump": skew_bump_net,
    "wavy": wavy_net,
    "dome": dome_net,
}
