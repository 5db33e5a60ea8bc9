"""Intersection and distance oracles, and the embedding certificate."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .bezier import Closedness, as_points, bbox_diagonal, classify_closedness, eval_grid, subdivide_grid
from .errors import DegenerateTriangle
from .mesh import TriMesh, level_knots, stack_to_grid, topology, triangulate_grid

DEFAULT_EPSILON = 1e-9
CHUNK = 200_000


class IntersectionKind(str, enum.Enum):
    PROPER_CROSSING = "proper_crossing"
    COPLANAR_OVERLAP = "coplanar_overlap"


@dataclass(frozen=True)
class Hit:
    kind: IntersectionKind
    witness: tuple


@dataclass(frozen=True)
class IntersectionRecord:
    tri_a: int
    tri_b: int
    kind: IntersectionKind
    witness: tuple


# -- predicates ----------------------------------------------------------------------

def _unit_normals(tris):
    cross = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    size = np.linalg.norm(cross, axis=1)
    longest = np.max(np.linalg.norm(tris - np.roll(tris, 1, axis=1), axis=2), axis=1)
    if np.any(size <= 1e-14 * longest**2):
        raise DegenerateTriangle("triangle with (numerically) zero area")
    return cross / size[:, None]


def _inside(x, tri, normal, eps):
    """Point-in-triangle by in-plane signed edge distances (``>= -eps``)."""
    ok = np.ones(len(x), dtype=bool)
    for k in range(3):
        a, b = tri[:, k], tri[:, (k + 1) % 3]
        inward = np.cross(normal, b - a)
        inward /= np.linalg.norm(inward, axis=1, keepdims=True)
        ok &= np.einsum("ij,ij->i", inward, x - a) >= -eps
    return ok


def _cross2(p, q):
    return p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0]


def _segments_meet_2d(a, b, c, d, eps):
    """Batched 2D segment test for ``ab`` against ``cd`` with tolerance.

    Returns ``(hit, point)`` with arrays of shape ``(K,)`` and ``(K, 2)``.
    """
    ab, cd = b - a, d - c
    len_ab = np.linalg.norm(ab, axis=1)
    len_cd = np.linalg.norm(cd, axis=1)
    s_c, s_d = _cross2(ab, c - a) / len_ab, _cross2(ab, d - a) / len_ab
    s_a, s_b = _cross2(cd, a - c) / len_cd, _cross2(cd, b - c) / len_cd

    def split(s0, s1):
        return ((s0 > eps) & (s1 > eps)) | ((s0 < -eps) & (s1 < -eps))

    hit = ~split(s_c, s_d) & ~split(s_a, s_b)
    point = a.copy()
    collinear = np.maximum.reduce([np.abs(s_c), np.abs(s_d), np.abs(s_a), np.abs(s_b)]) <= eps
    direction = ab / len_ab[:, None]
    t_c = np.einsum("ij,ij->i", c - a, direction)
    t_d = np.einsum("ij,ij->i", d - a, direction)
    lo = np.maximum(0.0, np.minimum(t_c, t_d))
    hi = np.minimum(len_ab, np.maximum(t_c, t_d))
    col = hit & collinear
    hit[col] = lo[col] <= hi[col] + eps
    point[col] = a[col] + (0.5 * (lo[col] + hi[col]))[:, None] * direction[col]
    cross = hit & ~collinear
    denom = _cross2(ab, cd)[cross]
    safe = np.where(denom != 0.0, denom, 1.0)
    s = np.where(denom != 0.0, _cross2(c - a, cd)[cross] / safe, 0.0)
    point[cross] = a[cross] + np.clip(s, 0.0, 1.0)[:, None] * ab[cross]
    return hit, point


def _in_plane_segment_hit(p0, p1, tri, normal, eps):
    """Segments lying (within eps) in their triangle's plane: 2D overlap test.

    Batched over ``K``; returns ``(hit, witness)``.
    """
    e1 = tri[:, 1] - tri[:, 0]
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(normal, e1)
    origin = tri[:, 0]

    def proj(p):
        rel = p - origin
        return np.stack([np.einsum("ij,ij->i", rel, e1), np.einsum("ij,ij->i", rel, e2)], axis=1)

    hit = np.zeros(len(p0), dtype=bool)
    witness = np.full((len(p0), 3), np.nan)
    for p in (p0, p1):
        ok = ~hit & _inside(p, tri, normal, eps)
        hit |= ok
        witness[ok] = p[ok]
    a, b = proj(p0), proj(p1)
    for k in range(3):
        found, q = _segments_meet_2d(a, b, proj(tri[:, k]), proj(tri[:, (k + 1) % 3]), eps)
        ok = found & ~hit
        hit |= ok
        witness[ok] = origin[ok] + q[ok, :1] * e1[ok] + q[ok, 1:] * e2[ok]
    return hit, witness


def _edges_vs_triangles(A, B, nB, eps):
    """Test the three edges of each ``A[k]`` against ``B[k]``.

    Returns ``(hit, witness)`` arrays.
    """
    K = len(A)
    hit = np.zeros(K, dtype=bool)
    witness = np.full((K, 3), np.nan)
    for e in range(3):
        p0, p1 = A[:, e], A[:, (e + 1) % 3]
        d0 = np.einsum("ij,ij->i", nB, p0 - B[:, 0])
        d1 = np.einsum("ij,ij->i", nB, p1 - B[:, 0])
        in_plane = (np.abs(d0) <= eps) & (np.abs(d1) <= eps)
        apart = ((d0 > eps) & (d1 > eps)) | ((d0 < -eps) & (d1 < -eps))
        cand = ~apart & ~in_plane & ~hit
        if cand.any():
            idx = np.nonzero(cand)[0]
            denom = d0[idx] - d1[idx]
            t = np.where(denom != 0.0, d0[idx] / np.where(denom != 0.0, denom, 1.0), 0.0)
            t = np.clip(t, 0.0, 1.0)
            x = p0[idx] + t[:, None] * (p1[idx] - p0[idx])
            ok = _inside(x, B[idx], nB[idx], eps)
            hit[idx[ok]] = True
            witness[idx[ok]] = x[ok]
        flat = np.nonzero(in_plane & ~hit)[0]
        if len(flat):
            ok, w = _in_plane_segment_hit(p0[flat], p1[flat], B[flat], nB[flat], eps)
            hit[flat[ok]] = True
            witness[flat[ok]] = w[ok]
    return hit, witness


def tri_tri_batch(A, B, eps: float):
    """Vectorized triangle-triangle intersection for paired arrays ``(K, 3, 3)``.

    Returns ``(hit, coplanar, witness)``. Shared vertices are not treated
    specially here; callers exclude adjacent pairs.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    nA, nB = _unit_normals(A), _unit_normals(B)
    dist_a = np.abs(np.einsum("kj,kij->ki", nB, A - B[:, :1]))
    dist_b = np.abs(np.einsum("kj,kij->ki", nA, B - A[:, :1]))
    coplanar = (dist_a.max(axis=1) <= eps) & (dist_b.max(axis=1) <= eps)
    hit_ab, w_ab = _edges_vs_triangles(A, B, nB, eps)
    hit_ba, w_ba = _edges_vs_triangles(B, A, nA, eps)
    witness = np.where(hit_ab[:, None], w_ab, w_ba)
    return hit_ab | hit_ba, coplanar, witness


def tri_tri_intersect(t1, t2, eps: float | None = None) -> Hit | None:
    """Intersection of two triangles, or None.

    Triangles sharing a vertex (exact coordinate equality) are treated as mesh
    neighbours and never reported. ``eps`` defaults to ``1e-9`` times the
    bounding-box diagonal of both triangles.
    """
    t1 = np.asarray(t1, dtype=float).reshape(3, 3)
    t2 = np.asarray(t2, dtype=float).reshape(3, 3)
    if eps is None:
        eps = DEFAULT_EPSILON * bbox_diagonal(np.vstack([t1, t2]))
    _unit_normals(np.stack([t1, t2]))
    if np.any(np.all(t1[:, None, :] == t2[None, :, :], axis=2)):
        return None
    hit, coplanar, witness = tri_tri_batch(t1[None], t2[None], eps)
    if not hit[0]:
        return None
    kind = IntersectionKind.COPLANAR_OVERLAP if coplanar[0] else IntersectionKind.PROPER_CROSSING
    return Hit(kind, tuple(float(c) for c in witness[0]))


# -- mesh-level oracle -------------------------------------------------------------------

def _grid_candidate_pairs(lo, hi):
    """Triangle pairs whose padded boxes share a uniform-grid cell."""
    F = len(lo)
    extent = (hi - lo).max(axis=1)
    cell = float(np.median(extent))
    if cell <= 0.0:
        cell = 1.0
    origin = lo.min(axis=0)
    ilo = np.floor((lo - origin) / cell).astype(np.int64)
    ihi = np.floor((hi - origin) / cell).astype(np.int64)
    span = ihi - ilo + 1
    dims = ihi.max(axis=0) + 1
    counts = span.prod(axis=1)
    owner = np.repeat(np.arange(F), counts)
    local = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    sx, sy = span[owner, 0], span[owner, 1]
    cx = ilo[owner, 0] + local % sx
    cy = ilo[owner, 1] + (local // sx) % sy
    cz = ilo[owner, 2] + local // (sx * sy)
    key = (cx * dims[1] + cy) * dims[2] + cz
    order = np.lexsort((owner, key))
    key, owner = key[order], owner[order]
    starts = np.flatnonzero(np.r_[True, key[1:] != key[:-1]])
    sizes = np.diff(np.r_[starts, len(key)])
    firsts, seconds = [], []
    for s in np.unique(sizes[sizes > 1]):
        group = starts[sizes == s][:, None] + np.arange(s)
        iu, ju = np.triu_indices(s, 1)
        firsts.append(owner[group[:, iu]].reshape(-1))
        seconds.append(owner[group[:, ju]].reshape(-1))
    if not firsts:
        return np.zeros((0, 2), dtype=np.int64)
    a = np.concatenate(firsts)
    b = np.concatenate(seconds)
    lo_ab, hi_ab = np.minimum(a, b), np.maximum(a, b)
    uniq = np.unique(lo_ab * F + hi_ab)
    return np.stack(np.divmod(uniq, F), axis=1)


def _brute_pairs(F):
    a, b = np.triu_indices(F, 1)
    return np.stack([a, b], axis=1).astype(np.int64)


def candidate_pairs(mesh: TriMesh, eps: float, method: str = "grid") -> np.ndarray:
    """Non-adjacent triangle pairs with overlapping (eps-padded) bounding boxes."""
    tris = mesh.positions[mesh.triangles]
    lo = tris.min(axis=1) - eps
    hi = tris.max(axis=1) + eps
    if method == "grid":
        pairs = _grid_candidate_pairs(lo, hi)
    elif method == "brute":
        pairs = _brute_pairs(mesh.num_faces)
    else:
        raise ValueError(f"unknown method {method!r}")
    if len(pairs) == 0:
        return pairs
    ta, tb = mesh.triangles[pairs[:, 0]], mesh.triangles[pairs[:, 1]]
    shared = np.any(ta[:, :, None] == tb[:, None, :], axis=(1, 2))
    overlap = np.all((lo[pairs[:, 0]] <= hi[pairs[:, 1]]) & (lo[pairs[:, 1]] <= hi[pairs[:, 0]]), axis=1)
    return pairs[~shared & overlap]


def self_intersections(mesh: TriMesh, epsilon: float = DEFAULT_EPSILON, method: str = "grid",
                       first_only: bool = False) -> list:
    """All intersecting pairs of triangles that share no vertex.

    ``epsilon`` is relative to the mesh bounding-box diagonal. ``method="brute"``
    tests every pair and serves as the slow cross-check of the grid pruning.
    """
    eps = epsilon * mesh.scale
    pairs = candidate_pairs(mesh, eps, method)
    tris = mesh.positions[mesh.triangles]
    records = []
    for start in range(0, len(pairs), CHUNK):
        chunk = pairs[start:start + CHUNK]
        hit, coplanar, witness = tri_tri_batch(tris[chunk[:, 0]], tris[chunk[:, 1]], eps)
        for k in np.nonzero(hit)[0]:
            kind = IntersectionKind.COPLANAR_OVERLAP if coplanar[k] else IntersectionKind.PROPER_CROSSING
            records.append(IntersectionRecord(int(chunk[k, 0]), int(chunk[k, 1]), kind,
                                              tuple(float(c) for c in witness[k])))
        if first_only and records:
            break
    return records


def grid_self_intersections(points, epsilon: float = DEFAULT_EPSILON) -> list:
    """Intersections inside the control surface of a single (open) grid."""
    return self_intersections(triangulate_grid(points, Closedness.OPEN), epsilon, method="brute")


# -- distance ---------------------------------------------------------------------------

def control_surface_points(mesh: TriMesh, us, vs) -> np.ndarray:
    """Evaluate the piecewise-linear control surface at parameters ``us x vs``."""
    grid_pts = mesh.grid_points
    u_knots, v_knots = mesh.knots
    us = np.asarray(us, dtype=float)
    vs = np.asarray(vs, dtype=float)
    i = np.clip(np.searchsorted(u_knots, us, side="right") - 1, 0, len(u_knots) - 2)
    j = np.clip(np.searchsorted(v_knots, vs, side="right") - 1, 0, len(v_knots) - 2)
    s = ((us - u_knots[i]) / (u_knots[i + 1] - u_knots[i]))[:, None, None]
    t = ((vs - v_knots[j]) / (v_knots[j + 1] - v_knots[j]))[None, :, None]
    I, J = np.meshgrid(i, j, indexing="ij")
    p00 = grid_pts[I, J]
    p10 = grid_pts[I + 1, J]
    p01 = grid_pts[I, J + 1]
    p11 = grid_pts[I + 1, J + 1]
    lower = p00 + s * (p10 - p00) + t * (p11 - p10)
    upper = p00 + t * (p01 - p00) + s * (p11 - p01)
    return np.where(s >= t, lower, upper)


def hausdorff_distance(mesh: TriMesh, net, samples: int = 32) -> float:
    """Sup-distance ``max |l(u, v) - b(u, v)|`` over shared parameter samples.

    Samples are a uniform ``samples x samples`` grid joined with the mesh's own
    grid-line parameters, so every control vertex is included.
    """
    if samples < 32:
        raise ValueError("at least 32 samples per direction are required")
    u_knots, v_knots = mesh.knots
    us = np.unique(np.concatenate([np.linspace(0.0, 1.0, samples), u_knots]))
    vs = np.unique(np.concatenate([np.linspace(0.0, 1.0, samples), v_knots]))
    diff = control_surface_points(mesh, us, vs) - eval_grid(net, us, vs)
    return float(np.linalg.norm(diff, axis=-1).max())


# -- certificate ---------------------------------------------------------------------------

class Verdict(str, enum.Enum):
    CERTIFIED = "Certified"
    NOT_YET = "NotYet"


@dataclass(frozen=True)
class Certificate:
    level: int
    conditions_pass: bool
    oracle_clear: bool
    hausdorff: float
    topology_match: bool
    verdict: Verdict
    failing_patches: int = 0
    intersections: int = 0


def level_verdicts(stack, closedness: Closedness) -> list:
    """Cone verdicts for every patch of a level, then every seam-straddling pair."""
    from .cones import grid_conditions, seam_pair_grids

    A, B = stack.shape[:2]
    grids = [stack[a, b] for a in range(A) for b in range(B)]
    if closedness.closed:
        grids += seam_pair_grids(stack)
    return [grid_conditions(g) for g in grids]


def assemble_certificate(level, verdicts, mesh, closedness, hausdorff, epsilon) -> Certificate:
    topo = topology(mesh)
    topology_match = topo.is_torus() if closedness.closed else topo.is_disk()
    hits = self_intersections(mesh, epsilon)
    failing = sum(1 for v in verdicts if not v.passes)
    conditions_pass = failing == 0
    oracle_clear = not hits
    ok = conditions_pass and oracle_clear and topology_match
    return Certificate(level, conditions_pass, oracle_clear, hausdorff, topology_match,
                       Verdict.CERTIFIED if ok else Verdict.NOT_YET, failing, len(hits))


def isotopy_certificate(net, level: int, epsilon: float = DEFAULT_EPSILON, samples: int = 32) -> Certificate:
    """Embedding certificate for the level-``k`` control surface.

    Certified when every patch (and, for closed nets, every seam pair) passes
    the cone conditions, the mesh has no self-intersections and its topology
    matches the smooth surface. This is a sufficient-condition heuristic, not
    a proof of ambient isotopy.
    """
    pts = as_points(net)
    closedness = classify_closedness(pts)
    stack = subdivide_grid(pts, level)
    count = stack.shape[0]
    mesh = triangulate_grid(stack_to_grid(stack), closedness,
                            level_knots(count, pts.shape[0] - 1), level_knots(count, pts.shape[1] - 1))
    verdicts = level_verdicts(stack, closedness)
    return assemble_certificate(level, verdicts, mesh, closedness,
                                hausdorff_distance(mesh, pts, samples), epsilon)
