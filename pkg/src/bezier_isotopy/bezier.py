"""Tensor-product Bezier surfaces: evaluation, derivatives and subdivision.

Control points are stored as an array of shape ``(n + 1, m + 1, 3)`` where the
first index runs along ``u`` and the second along ``v``.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial import cKDTree

from .errors import UnsupportedTopology

MAX_DEGREE = 32
ALMOST_CLOSED_TOL = 1e-12


class Closedness(enum.Enum):
    OPEN = "open"
    CLOSED_TORUS = "closed"

    @property
    def closed(self) -> bool:
        return self is Closedness.CLOSED_TORUS


@dataclass(frozen=True, eq=False)
class ControlNet:
    """Rectangular grid of 3D control points ``p[i, j]``."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.array(self.points, dtype=float)
        if pts.ndim != 3 or pts.shape[2] != 3:
            raise ValueError(f"control points must have shape (rows, cols, 3), got {pts.shape}")
        if pts.shape[0] < 2 or pts.shape[1] < 2:
            raise ValueError("a control net needs degree >= 1 in both directions")
        if max(pts.shape[0], pts.shape[1]) - 1 > MAX_DEGREE:
            raise ValueError(f"degrees above {MAX_DEGREE} are not supported")
        if not np.all(np.isfinite(pts)):
            raise ValueError("control points must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0] - 1

    @property
    def m(self) -> int:
        return self.points.shape[1] - 1

    @property
    def rows(self) -> int:
        return self.points.shape[0]

    @property
    def cols(self) -> int:
        return self.points.shape[1]

    @property
    def scale(self) -> float:
        """Bounding-box diagonal of the control points."""
        return bbox_diagonal(self.points)

    def __eq__(self, other):
        if not isinstance(other, ControlNet):
            return NotImplemented
        return self.points.shape == other.points.shape and np.array_equal(self.points, other.points)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class BezierPatch:
    """A control net bound to the parameter rectangle ``[u0, u1] x [v0, v1]``."""

    net: ControlNet
    domain: tuple = (0.0, 1.0, 0.0, 1.0)

    def __post_init__(self):
        if not isinstance(self.net, ControlNet):
            object.__setattr__(self, "net", ControlNet(self.net))
        u0, u1, v0, v1 = (float(x) for x in self.domain)
        if not (0.0 <= u0 < u1 <= 1.0 and 0.0 <= v0 < v1 <= 1.0):
            raise ValueError(f"invalid patch domain {self.domain}")
        object.__setattr__(self, "domain", (u0, u1, v0, v1))

    @property
    def width_u(self) -> float:
        return self.domain[1] - self.domain[0]

    @property
    def width_v(self) -> float:
        return self.domain[3] - self.domain[2]

    def to_local(self, u, v):
        """Map global parameters into this patch's ``[0, 1]^2``."""
        u0, u1, v0, v1 = self.domain
        return (np.asarray(u) - u0) / (u1 - u0), (np.asarray(v) - v0) / (v1 - v0)


def bbox_diagonal(points) -> float:
    pts = np.asarray(points, dtype=float).reshape(-1, np.shape(points)[-1])
    return float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))


def as_points(net) -> np.ndarray:
    """Return the control point array of a net, patch or raw array."""
    if isinstance(net, BezierPatch):
        return net.net.points
    if isinstance(net, ControlNet):
        return net.points
    return np.asarray(net, dtype=float)


# -- Bernstein basis ---------------------------------------------------------

@lru_cache(maxsize=None)
def binomial_row(n: int) -> tuple:
    """Binomial coefficients ``C(n, 0..n)`` from Pascal's triangle."""
    if n < 0:
        raise ValueError("degree must be non-negative")
    row = [1]
    for _ in range(n):
        row = [1] + [row[k] + row[k + 1] for k in range(len(row) - 1)] + [1]
    return tuple(row)


def bernstein(n: int, i: int, u: float) -> float:
    if not 0 <= i <= n:
        raise ValueError(f"Bernstein index {i} out of range for degree {n}")
    return binomial_row(n)[i] * u**i * (1.0 - u) ** (n - i)


def bernstein_basis(n: int, u) -> np.ndarray:
    """All degree-``n`` Bernstein polynomials at ``u``; shape ``(len(u), n + 1)``."""
    u = np.atleast_1d(np.asarray(u, dtype=float))[:, None]
    i = np.arange(n + 1)
    coeffs = np.array(binomial_row(n), dtype=float)
    return coeffs * u**i * (1.0 - u) ** (n - i)


# -- evaluation ---------------------------------------------------------------

def _corner(points, u, v):
    if u in (0.0, 1.0) and v in (0.0, 1.0):
        return points[-1 if u == 1.0 else 0, -1 if v == 1.0 else 0].copy()
    return None


def eval_surface(net, u: float, v: float) -> np.ndarray:
    """Evaluate ``sum_ij B_i(u) B_j(v) p_ij`` by Bernstein summation."""
    pts = as_points(net)
    corner = _corner(pts, u, v)
    if corner is not None:
        return corner
    bu = bernstein_basis(pts.shape[0] - 1, u)[0]
    bv = bernstein_basis(pts.shape[1] - 1, v)[0]
    return np.einsum("i,ijk,j->k", bu, pts, bv)


def eval_grid(net, us, vs) -> np.ndarray:
    """Evaluate on the tensor grid ``us x vs``; returns ``(len(us), len(vs), 3)``."""
    pts = as_points(net)
    bu = bernstein_basis(pts.shape[0] - 1, us)
    bv = bernstein_basis(pts.shape[1] - 1, vs)
    return np.einsum("ai,ijk,bj->abk", bu, pts, bv)


def de_casteljau_curve(points, t: float) -> np.ndarray:
    """Evaluate a Bezier curve (control points along axis 0) by repeated lerp."""
    cur = np.asarray(points, dtype=float)
    while cur.shape[0] > 1:
        cur = (1.0 - t) * cur[:-1] + t * cur[1:]
    return cur[0]


def de_casteljau_eval(net, u: float, v: float) -> np.ndarray:
    """Evaluate a patch with de Casteljau: reduce every column in ``u``, then in ``v``."""
    pts = as_points(net)
    corner = _corner(pts, u, v)
    if corner is not None:
        return corner
    column = de_casteljau_curve(pts, u)
    return de_casteljau_curve(column, v)


def eval_curve(points, ts) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    return bernstein_basis(pts.shape[0] - 1, ts) @ pts


# -- subdivision -------------------------------------------------------------

def split_curve(points, t: float = 0.5, axis: int = 0):
    """Split control points at ``t`` along ``axis``; returns ``(left, right)``.

    Every other axis is carried along, so a whole stack of nets is split in one
    call. The last point of ``left`` and the first point of ``right`` are the
    same array values.
    """
    cur = np.moveaxis(np.asarray(points, dtype=float), axis, 0)
    left = [cur[0]]
    right = [cur[-1]]
    for _ in range(cur.shape[0] - 1):
        cur = (1.0 - t) * cur[:-1] + t * cur[1:]
        left.append(cur[0])
        right.append(cur[-1])
    left = np.stack(left)
    right = np.stack(right[::-1])
    return np.moveaxis(left, 0, axis), np.moveaxis(right, 0, axis)


def subdivide_curve(points, levels: int) -> np.ndarray:
    """Control polygon after ``levels`` midpoint subdivisions, pieces concatenated."""
    pieces = [np.asarray(points, dtype=float)]
    for _ in range(levels):
        nxt = []
        for piece in pieces:
            nxt.extend(split_curve(piece))
        pieces = nxt
    out = [pieces[0]] + [p[1:] for p in pieces[1:]]
    return np.concatenate(out)


def subdivide_patch(patch: BezierPatch):
    """Split a patch at its parameter midpoint in ``u`` and ``v``.

    Returns four children ordered ``(u-low, v-low), (u-low, v-high),
    (u-high, v-low), (u-high, v-high)``.
    """
    lo_u, hi_u = split_curve(patch.net.points, 0.5, axis=0)
    u0, u1, v0, v1 = patch.domain
    um, vm = 0.5 * (u0 + u1), 0.5 * (v0 + v1)
    children = []
    for half_u, (a, b) in ((lo_u, (u0, um)), (hi_u, (um, u1))):
        lo_v, hi_v = split_curve(half_u, 0.5, axis=1)
        children.append(BezierPatch(ControlNet(lo_v), (a, b, v0, vm)))
        children.append(BezierPatch(ControlNet(hi_v), (a, b, vm, v1)))
    return tuple(children)


def subdivide_grid(points, levels: int) -> np.ndarray:
    """Uniformly subdivide a net ``levels`` times.

    Returns an array of shape ``(2**k, 2**k, n + 1, m + 1, 3)``; entry ``[a, b]``
    is the patch over ``[a, a + 1] / 2**k x [b, b + 1] / 2**k``.
    """
    stack = np.asarray(as_points(points), dtype=float)[None, None]
    for _ in range(levels):
        lo, hi = split_curve(stack, 0.5, axis=2)
        stack = np.stack([lo, hi], axis=1)
        s = stack.shape
        stack = stack.reshape(s[0] * 2, *s[2:])
        lo, hi = split_curve(stack, 0.5, axis=3)
        stack = np.stack([lo, hi], axis=2)
        s = stack.shape
        stack = stack.reshape(s[0], s[1] * 2, *s[3:])
    return stack


def patches_from_grid(stack) -> list:
    count_u, count_v = stack.shape[:2]
    out = []
    for a in range(count_u):
        for b in range(count_v):
            domain = (a / count_u, (a + 1) / count_u, b / count_v, (b + 1) / count_v)
            out.append(BezierPatch(ControlNet(stack[a, b]), domain))
    return out


def patches_at_level(net, level: int) -> list:
    return patches_from_grid(subdivide_grid(net, level))


# -- derivatives ---------------------------------------------------------------

def _difference_net(pts, order, axis):
    deg = pts.shape[axis] - 1
    if order > deg:
        return None
    factor = 1.0
    for r in range(order):
        factor *= deg - r
    return factor * np.diff(pts, n=order, axis=axis) if order else pts


def derivative_net(net, order_u: int, order_v: int):
    """Control points of the ``(order_u, order_v)`` partial derivative, or None if it vanishes."""
    pts = as_points(net)
    d = _difference_net(pts, order_u, 0)
    if d is None:
        return None
    return _difference_net(d, order_v, 1)


def surface_derivatives(net, u: float, v: float, order_u: int = 1, order_v: int = 0) -> np.ndarray:
    """Exact partial derivative of the surface; zero when an order exceeds the degree."""
    d = derivative_net(net, order_u, order_v)
    if d is None:
        return np.zeros(as_points(net).shape[-1])
    return eval_grid(d, [u], [v])[0, 0]


def derivative_grid(net, us, vs, order_u: int, order_v: int) -> np.ndarray:
    """Partial derivative on the tensor grid ``us x vs``."""
    d = derivative_net(net, order_u, order_v)
    if d is None:
        return np.zeros((len(us), len(vs), as_points(net).shape[-1]))
    return eval_grid(d, us, vs)


def derivative_at(net, us, vs, order_u: int, order_v: int) -> np.ndarray:
    """Partial derivative at paired parameters ``(us[k], vs[k])``."""
    us = np.atleast_1d(np.asarray(us, dtype=float))
    vs = np.atleast_1d(np.asarray(vs, dtype=float))
    d = derivative_net(net, order_u, order_v)
    if d is None:
        return np.zeros((len(us), as_points(net).shape[-1]))
    bu = bernstein_basis(d.shape[0] - 1, us)
    bv = bernstein_basis(d.shape[1] - 1, vs)
    return np.einsum("ki,ijd,kj->kd", bu, d, bv)


def curve_derivative(points, ts, order: int = 1) -> np.ndarray:
    d = _difference_net(np.asarray(points, dtype=float), order, 0)
    if d is None:
        return np.zeros((len(np.atleast_1d(ts)), np.shape(points)[-1]))
    return eval_curve(d, ts)


# -- topology / regularity -----------------------------------------------------

def classify_closedness(net) -> Closedness:
    """Open, closed (torus) or :class:`UnsupportedTopology`, by exact seam equality."""
    pts = as_points(net)
    eq_v = np.all(pts[:, 0] == pts[:, -1], axis=-1)
    eq_u = np.all(pts[0, :] == pts[-1, :], axis=-1)
    if eq_v.all() and eq_u.all():
        return Closedness.CLOSED_TORUS
    if not eq_v.any() and not eq_u.any():
        tol = ALMOST_CLOSED_TOL * bbox_diagonal(pts)
        gap_v = np.linalg.norm(pts[:, 0] - pts[:, -1], axis=-1).max()
        gap_u = np.linalg.norm(pts[0, :] - pts[-1, :], axis=-1).max()
        if gap_v <= tol and gap_u <= tol:
            warnings.warn("control net is almost closed but its seams are not exactly equal",
                          stacklevel=2)
        return Closedness.OPEN
    raise UnsupportedTopology(
        "control net is neither open nor closed: seam points are only partly identified")


@dataclass(frozen=True)
class Violation:
    kind: str  # "duplicate" or "collinear"
    indices: tuple
    value: float


def validate_regularity(net, tol: float = 1e-12, closedness: Closedness | None = None) -> list:
    """Report duplicate control points and collinear triples inside cells.

    Tolerances are relative: points closer than ``tol * scale`` are duplicates
    and a triple whose cross product is at most ``tol * scale**2`` is collinear,
    with ``scale`` the bounding-box diagonal.
    """
    if tol < 0:
        raise ValueError("tol must be non-negative")
    pts = as_points(net)
    if closedness is None:
        closedness = classify_closedness(pts)
    rows, cols = pts.shape[:2]
    scale = bbox_diagonal(pts)
    violations = []

    flat = pts.reshape(-1, 3)
    ii, jj = np.divmod(np.arange(flat.shape[0]), cols)
    if closedness.closed:
        canon = (ii % (rows - 1)) * cols + (jj % (cols - 1))
    else:
        canon = np.arange(flat.shape[0])
    for a, b in sorted(cKDTree(flat).query_pairs(r=tol * scale)):
        if canon[a] != canon[b]:
            violations.append(Violation(
                "duplicate", ((ii[a], jj[a]), (ii[b], jj[b])),
                float(np.linalg.norm(flat[a] - flat[b]))))

    corners = [pts[:-1, :-1], pts[:-1, 1:], pts[1:, :-1], pts[1:, 1:]]
    offsets = [(0, 0), (0, 1), (1, 0), (1, 1)]
    for a, b, c in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        area2 = np.linalg.norm(np.cross(corners[b] - corners[a], corners[c] - corners[a]), axis=-1)
        for i, j in zip(*np.nonzero(area2 <= tol * scale**2)):
            idx = tuple((i + offsets[k][0], j + offsets[k][1]) for k in (a, b, c))
            violations.append(Violation("collinear", idx, float(area2[i, j])))
    return violations
