"""Triangulated control surfaces and their topology."""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .bezier import (Closedness, as_points, bbox_diagonal, classify_closedness, subdivide_grid,
                     validate_regularity)
from .errors import DegenerateCell, InvalidTiling, NonManifold, SeamMismatch, UnsupportedTopology

WELD_TOL = 1e-12


class VertexRole(str, enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"
    CORNER = "corner"
    SEAM = "seam"


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Indexed triangle mesh.

    ``grid`` and ``knots`` are present for meshes built from a control grid:
    ``grid[I, J]`` is the vertex id of grid node ``(I, J)`` and ``knots`` holds
    the parameter values of the grid lines in ``u`` and ``v``.
    """

    positions: np.ndarray
    triangles: np.ndarray
    params: np.ndarray | None = None
    roles: tuple | None = None
    grid: np.ndarray | None = None
    knots: tuple | None = None

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        tri = np.array(self.triangles, dtype=np.int64).reshape(-1, 3)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError("positions must have shape (V, 3)")
        if tri.size and (tri.min() < 0 or tri.max() >= len(pos)):
            raise ValueError("triangle index out of range")
        if np.any((tri[:, 0] == tri[:, 1]) | (tri[:, 1] == tri[:, 2]) | (tri[:, 0] == tri[:, 2])):
            raise ValueError("every triangle needs three distinct vertices")
        for arr in (pos, tri):
            arr.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "triangles", tri)
        if self.params is not None:
            par = np.array(self.params, dtype=float)
            par.setflags(write=False)
            object.__setattr__(self, "params", par)
        if self.roles is None:
            roles = tuple(VertexRole.BOUNDARY if b else VertexRole.INTERIOR
                          for b in self.boundary_vertex_mask)
            object.__setattr__(self, "roles", roles)

    @property
    def num_vertices(self) -> int:
        return len(self.positions)

    @property
    def num_faces(self) -> int:
        return len(self.triangles)

    @cached_property
    def _edge_table(self):
        tri = self.triangles
        half = np.concatenate([tri[:, [0, 1]], tri[:, [1, 2]], tri[:, [2, 0]]])
        faces = np.tile(np.arange(len(tri)), 3)
        undirected = np.sort(half, axis=1)
        edges, inverse, counts = np.unique(undirected, axis=0, return_inverse=True, return_counts=True)
        return edges, inverse.reshape(-1), counts, half, faces

    @property
    def edges(self) -> np.ndarray:
        return self._edge_table[0]

    @property
    def edge_face_counts(self) -> np.ndarray:
        return self._edge_table[2]

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        edges, _, counts, _, _ = self._edge_table
        return edges[counts == 1]

    @cached_property
    def boundary_vertex_mask(self) -> np.ndarray:
        mask = np.zeros(self.num_vertices, dtype=bool)
        mask[self.boundary_edges.reshape(-1)] = True
        return mask

    @cached_property
    def grid_points(self) -> np.ndarray:
        if self.grid is None:
            raise ValueError("mesh was not built from a control grid")
        return self.positions[self.grid]

    @property
    def scale(self) -> float:
        return bbox_diagonal(self.positions)


@dataclass(frozen=True)
class TopologyReport:
    V: int
    E: int
    F: int
    euler_char: int
    boundary_loops: int
    orientable: bool

    @property
    def closed(self) -> bool:
        return self.boundary_loops == 0

    def is_disk(self) -> bool:
        return self.euler_char == 1 and self.boundary_loops == 1 and self.orientable

    def is_torus(self) -> bool:
        return self.euler_char == 0 and self.boundary_loops == 0 and self.orientable


# -- construction -----------------------------------------------------------------

def grid_triangles(index: np.ndarray) -> np.ndarray:
    """Split every cell of an index grid along the ``(i, j) -> (i+1, j+1)`` diagonal.

    Both triangles are counterclockwise in parameter space.
    """
    a = index[:-1, :-1].reshape(-1)
    b = index[1:, :-1].reshape(-1)
    c = index[1:, 1:].reshape(-1)
    d = index[:-1, 1:].reshape(-1)
    lower = np.stack([a, b, c], axis=1)
    upper = np.stack([a, c, d], axis=1)
    return np.stack([lower, upper], axis=1).reshape(-1, 3)


def triangulate_grid(points, closedness: Closedness, u_knots=None, v_knots=None) -> TriMesh:
    """Triangulate a grid of points without regularity checks.

    For closed grids the last row/column are identified with the first; their
    coordinates must agree within ``WELD_TOL * scale`` or :class:`SeamMismatch`
    is raised.
    """
    pts = np.asarray(points, dtype=float)
    rows, cols = pts.shape[:2]
    N, M = rows - 1, cols - 1
    u_knots = np.linspace(0.0, 1.0, rows) if u_knots is None else np.asarray(u_knots, dtype=float)
    v_knots = np.linspace(0.0, 1.0, cols) if v_knots is None else np.asarray(v_knots, dtype=float)
    I, J = np.meshgrid(np.arange(rows), np.arange(cols), indexing="ij")

    if closedness.closed:
        if N < 3 or M < 3:
            raise UnsupportedTopology("a closed grid needs at least 3 cells per direction")
        tol = WELD_TOL * bbox_diagonal(pts)
        gap = max(np.abs(pts[0] - pts[-1]).max(), np.abs(pts[:, 0] - pts[:, -1]).max())
        if gap > tol:
            raise SeamMismatch(f"seam points differ by {gap:g}")
        index = (I % N) * M + (J % M)
        positions = pts[:N, :M].reshape(-1, 3)
        params = np.stack(np.meshgrid(u_knots[:N], v_knots[:M], indexing="ij"), axis=-1).reshape(-1, 2)
        on_seam = ((I[:N, :M] == 0) | (J[:N, :M] == 0)).reshape(-1)
        roles = tuple(VertexRole.SEAM if s else VertexRole.INTERIOR for s in on_seam)
    else:
        index = I * cols + J
        positions = pts.reshape(-1, 3)
        params = np.stack(np.meshgrid(u_knots, v_knots, indexing="ij"), axis=-1).reshape(-1, 2)
        edge_u = (I == 0) | (I == N)
        edge_v = (J == 0) | (J == M)
        roles = tuple(
            VertexRole.CORNER if eu and ev else VertexRole.BOUNDARY if eu or ev else VertexRole.INTERIOR
            for eu, ev in zip(edge_u.reshape(-1), edge_v.reshape(-1)))

    return TriMesh(positions, grid_triangles(index), params, roles, index, (u_knots, v_knots))


def triangulate_net(net, closedness: Closedness | None = None, tol: float = 1e-12) -> TriMesh:
    """Control surface of a net: each cell split along ``p_ij -- p_i+1,j+1``."""
    pts = as_points(net)
    if closedness is None:
        closedness = classify_closedness(pts)
    bad = validate_regularity(pts, tol, closedness)
    if bad:
        v = bad[0]
        raise DegenerateCell(f"{len(bad)} regularity violation(s); first: {v.kind} at {v.indices}")
    return triangulate_grid(pts, closedness)


def _breakpoints(values):
    return np.unique(np.asarray(values, dtype=float))


def assemble_grid(patches) -> tuple:
    """Weld the control nets of a tiling into one global grid.

    Returns ``(points, u_knots, v_knots)``.
    """
    patches = list(patches)
    if not patches:
        raise InvalidTiling("no patches given")
    n, m = patches[0].net.n, patches[0].net.m
    if any(p.net.n != n or p.net.m != m for p in patches):
        raise InvalidTiling("all patches must have the same degrees")
    ub = _breakpoints([p.domain[0] for p in patches] + [p.domain[1] for p in patches])
    vb = _breakpoints([p.domain[2] for p in patches] + [p.domain[3] for p in patches])
    if ub[0] != 0.0 or ub[-1] != 1.0 or vb[0] != 0.0 or vb[-1] != 1.0:
        raise InvalidTiling("patch domains do not cover the unit square")
    A, B = len(ub) - 1, len(vb) - 1
    if len(patches) != A * B:
        raise InvalidTiling(f"expected {A * B} patches for the breakpoint grid, got {len(patches)}")

    pts = np.zeros((A * n + 1, B * m + 1, 3))
    written = np.zeros(pts.shape[:2], dtype=bool)
    seen = np.zeros((A, B), dtype=bool)
    scale = max(p.net.scale for p in patches)
    tol = WELD_TOL * scale
    for p in patches:
        a = int(np.searchsorted(ub, p.domain[0]))
        b = int(np.searchsorted(vb, p.domain[2]))
        if a >= A or b >= B or ub[a + 1] != p.domain[1] or vb[b + 1] != p.domain[3]:
            raise InvalidTiling(f"patch domain {p.domain} is not a cell of the tiling")
        if seen[a, b]:
            raise InvalidTiling(f"patch domain {p.domain} covered twice")
        seen[a, b] = True
        rs, cs = slice(a * n, (a + 1) * n + 1), slice(b * m, (b + 1) * m + 1)
        block = p.net.points
        mask = written[rs, cs]
        if mask.any():
            gap = np.abs(pts[rs, cs][mask] - block[mask]).max()
            if gap > tol:
                raise SeamMismatch(f"adjacent patches disagree by {gap:g} on a shared boundary")
        pts[rs, cs] = np.where(mask[..., None], pts[rs, cs], block)
        written[rs, cs] = True

    u_knots = np.concatenate([np.linspace(ub[a], ub[a + 1], n + 1)[:-1] for a in range(A)] + [[1.0]])
    v_knots = np.concatenate([np.linspace(vb[b], vb[b + 1], m + 1)[:-1] for b in range(B)] + [[1.0]])
    return pts, u_knots, v_knots


def stack_to_grid(stack) -> np.ndarray:
    """Global grid from a ``(A, B, n+1, m+1, 3)`` patch stack (shared rows taken once)."""
    A, B, r, c = stack.shape[:4]
    n, m = r - 1, c - 1
    pts = np.empty((A * n + 1, B * m + 1, 3))
    for a in range(A):
        for b in range(B):
            pts[a * n:(a + 1) * n + 1, b * m:(b + 1) * m + 1] = stack[a, b]
    return pts


def level_knots(count: int, n: int) -> np.ndarray:
    return np.arange(count * n + 1) / (count * n)


def control_mesh_at_level(net, level: int, closedness: Closedness | None = None) -> TriMesh:
    """Welded control surface after ``level`` uniform subdivisions."""
    pts = as_points(net)
    if closedness is None:
        closedness = classify_closedness(pts)
    stack = subdivide_grid(pts, level)
    count = stack.shape[0]
    return triangulate_grid(stack_to_grid(stack), closedness,
                            level_knots(count, pts.shape[0] - 1), level_knots(count, pts.shape[1] - 1))


def mesh_from_patches(patches, closedness: Closedness) -> TriMesh:
    """Triangulate every patch net and weld the shared boundary vertices."""
    pts, u_knots, v_knots = assemble_grid(patches)
    return triangulate_grid(pts, closedness, u_knots, v_knots)


# -- topology -------------------------------------------------------------------

def _orientable(mesh: TriMesh) -> bool:
    _, inverse, counts, half, faces = mesh._edge_table
    order = np.argsort(inverse, kind="stable")
    inv_sorted = inverse[order]
    starts = np.searchsorted(inv_sorted, np.nonzero(counts == 2)[0])
    first, second = order[starts], order[starts + 1]
    f, g = faces[first], faces[second]
    # two faces agree when they traverse the shared edge in opposite directions
    same_dir = half[first, 0] == half[second, 0]
    adjacency = [[] for _ in range(mesh.num_faces)]
    for a, b, flip in zip(f.tolist(), g.tolist(), same_dir.tolist()):
        adjacency[a].append((b, flip))
        adjacency[b].append((a, flip))
    sign = [0] * mesh.num_faces
    for start in range(mesh.num_faces):
        if sign[start]:
            continue
        sign[start] = 1
        queue = deque([start])
        while queue:
            x = queue.popleft()
            for y, flip in adjacency[x]:
                want = -sign[x] if flip else sign[x]
                if sign[y] == 0:
                    sign[y] = want
                    queue.append(y)
                elif sign[y] != want:
                    return False
    return True


def topology(mesh: TriMesh) -> TopologyReport:
    counts = mesh.edge_face_counts
    if np.any(counts > 2):
        bad = mesh.edges[np.argmax(counts > 2)]
        raise NonManifold(f"edge {tuple(bad.tolist())} is shared by more than two triangles")
    V, E, F = mesh.num_vertices, len(mesh.edges), mesh.num_faces
    bnd = mesh.boundary_edges
    loops = 0
    if len(bnd):
        verts, local = np.unique(bnd, return_inverse=True)
        local = local.reshape(-1, 2)
        graph = coo_matrix((np.ones(len(local)), (local[:, 0], local[:, 1])), shape=(len(verts),) * 2)
        loops = connected_components(graph, directed=False)[0]
    return TopologyReport(V, E, F, V - E + F, int(loops), _orientable(mesh))


def homeomorphism_check(mesh: TriMesh, closedness: Closedness, epsilon: float = 1e-9) -> bool:
    """True when the mesh has the topology of the smooth surface and is embedded.

    Open surfaces must give a disk, closed ones a torus; embeddedness is checked
    with the self-intersection oracle (``epsilon`` relative to the mesh size).
    """
    from .intersect import self_intersections

    topo = topology(mesh)
    expected = topo.is_torus() if closedness.closed else topo.is_disk()
    if not expected:
        return False
    return not self_intersections(mesh, epsilon=epsilon, first_only=True)
