"""Watertight surface triangulations of the zero level set of a P1 field.

Each tetrahedron with a strict sign pattern is cut by the plane where the
linear interpolant vanishes: one lone sign gives a triangle, a 2+2 split
gives a convex planar quadrilateral.  Cut vertices live on grid edges and
are shared between neighbouring tets through a global edge key, which makes
the triangulation watertight by construction.  Quadrilaterals are split
along the diagonal at their largest inner angle, which keeps all surface
angles bounded away from pi.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components

from .level_set import NodalField
from .tet_grid import TetMesh

__all__ = [
    "CutVertexTable",
    "RawSurface",
    "SurfaceMesh",
    "extract_raw",
    "split_quad",
    "extract_surface",
    "plane_residuals",
]


@dataclass
class CutVertexTable:
    """Deduplicated cut vertices, one per cut grid edge.

    edges : (Nv, 2) int, sorted global node pairs (a < b)
    t : (Nv,) float in (0, 1), parameter along a -> b of the zero crossing
    points : (Nv, 3) float positions
    Vertices are ordered by their (a, b) edge key, so the table is a pure
    function of mesh + field.
    """

    edges: np.ndarray
    t: np.ndarray
    points: np.ndarray

    def __len__(self) -> int:
        return len(self.edges)


@dataclass
class RawSurface:
    """Cut polygons before quad splitting.

    Triangle/quad rows hold indices into ``vertices``; polygons are in
    cyclic order (consecutive corners share a tet face) and oriented so the
    polygon normal points from phi < 0 to phi > 0.
    """

    vertices: CutVertexTable
    tris: np.ndarray        # (Nt, 3) int
    tri_parent: np.ndarray  # (Nt,) tet index
    quads: np.ndarray       # (Nq, 4) int
    quad_parent: np.ndarray

    @property
    def n_segments(self) -> int:
        return len(self.tris) + len(self.quads)


@dataclass
class SurfaceMesh:
    """Oriented watertight triangulation of the extracted surface."""

    vertices: np.ndarray       # (Nv, 3)
    triangles: np.ndarray      # (F, 3) int
    vertex_edges: np.ndarray   # (Nv, 2) parent grid edge (sorted node pair)
    vertex_t: np.ndarray       # (Nv,) crossing parameter
    tri_parent: np.ndarray     # (F,) parent tet index
    tri_from_quad: np.ndarray  # (F,) bool, True for quad halves
    h: float = 0.0

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if self.triangles.size and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise ValueError("triangle indices out of range")

    @classmethod
    def from_arrays(cls, vertices: np.ndarray, triangles: np.ndarray,
                    h: float = 0.0) -> "SurfaceMesh":
        """Wrap plain vertex/triangle arrays (no extraction provenance)."""
        vertices = np.asarray(vertices, dtype=np.float64)
        triangles = np.asarray(triangles, dtype=np.int64)
        nv, nf = len(vertices), len(triangles)
        return cls(
            vertices=vertices,
            triangles=triangles,
            vertex_edges=np.zeros((nv, 2), dtype=np.int64),
            vertex_t=np.zeros(nv),
            tri_parent=np.full(nf, -1, dtype=np.int64),
            tri_from_quad=np.zeros(nf, dtype=bool),
            h=float(h),
        )

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def tri_coords(self) -> np.ndarray:
        return self.vertices[self.triangles]

    def areas(self) -> np.ndarray:
        p = self.tri_coords()
        return 0.5 * np.linalg.norm(
            np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]), axis=1
        )

    def normals(self) -> np.ndarray:
        """Unit normals in triangle orientation (phi < 0 side to phi > 0)."""
        p = self.tri_coords()
        n = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        nn = np.linalg.norm(n, axis=1, keepdims=True)
        if np.any(nn <= 0.0):
            raise ValueError("degenerate (zero-area) surface triangle")
        return n / nn

    def edge_multiplicities(self) -> tuple[np.ndarray, np.ndarray]:
        """Distinct undirected triangle edges and their occurrence counts."""
        e = self.triangles[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2)
        e = np.sort(e, axis=1)
        edges, counts = np.unique(e, axis=0, return_counts=True)
        return edges, counts

    def is_watertight(self) -> bool:
        """True when every edge is shared by exactly two triangles."""
        _, counts = self.edge_multiplicities()
        return bool(np.all(counts == 2))

    def orientation_consistent(self) -> bool:
        """True when no directed edge appears twice (coherent orientation)."""
        e = self.triangles[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2)
        _, counts = np.unique(e, axis=0, return_counts=True)
        return bool(np.all(counts == 1))

    def euler_characteristic(self) -> int:
        edges, _ = self.edge_multiplicities()
        return self.n_vertices - len(edges) + self.n_triangles

    def n_components(self) -> int:
        if self.n_triangles == 0:
            return 0
        e, _ = self.edge_multiplicities()
        n = self.n_vertices
        adj = sp.coo_matrix(
            (np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n)
        )
        ncomp, _ = connected_components(adj, directed=False)
        return int(ncomp)


def _cut_polygons(mesh: TetMesh, field: NodalField):
    """Classify cut tets and list their cut edges in cyclic polygon order."""
    if field.mesh is not mesh and field.mesh.n_nodes != mesh.n_nodes:
        raise ValueError("field does not match the mesh")
    vals = field.values
    if np.any(vals == 0.0):
        raise ValueError(
            "field has exact nodal zeros; apply snap_small_values first"
        )

    tv = vals[mesh.tets]
    pos = tv > 0.0
    npos = pos.sum(axis=1)

    tri_mask = (npos == 1) | (npos == 3)
    quad_mask = npos == 2
    tri_tets = np.flatnonzero(tri_mask)
    quad_tets = np.flatnonzero(quad_mask)

    # triangles: lone-sign vertex against the other three
    tp = pos[tri_tets]
    lone_is_pos = npos[tri_mask] == 1
    lone = np.where(lone_is_pos, tp.argmax(axis=1), (~tp).argmax(axis=1))
    others = np.argsort(np.arange(4)[None, :] == lone[:, None], axis=1, kind="stable")[:, :3]
    others = np.sort(others, axis=1)
    g = mesh.tets[tri_tets]
    tri_edges = np.stack(
        [
            np.stack([np.take_along_axis(g, lone[:, None], 1)[:, 0],
                      np.take_along_axis(g, others[:, [k]], 1)[:, 0]], axis=1)
            for k in range(3)
        ],
        axis=1,
    )  # (Nt, 3, 2) global node pairs

    # quads: cut edges pair each positive with each negative node; the cyclic
    # order (p1n1, p1n2, p2n2, p2n1) makes consecutive corners share a face
    qp = pos[quad_tets]
    pidx = np.argsort(~qp, axis=1, kind="stable")[:, :2]
    nidx = np.argsort(qp, axis=1, kind="stable")[:, :2]
    gq = mesh.tets[quad_tets]
    take = lambda idx: np.take_along_axis(gq, idx, 1)
    p1, p2 = take(pidx[:, [0]])[:, 0], take(pidx[:, [1]])[:, 0]
    n1, n2 = take(nidx[:, [0]])[:, 0], take(nidx[:, [1]])[:, 0]
    quad_edges = np.stack(
        [
            np.stack([p1, n1], 1),
            np.stack([p1, n2], 1),
            np.stack([p2, n2], 1),
            np.stack([p2, n1], 1),
        ],
        axis=1,
    )  # (Nq, 4, 2)

    return tri_tets, tri_edges, quad_tets, quad_edges


def _tet_gradients(mesh: TetMesh, vals: np.ndarray, tet_ids: np.ndarray) -> np.ndarray:
    """Constant gradient of the P1 interpolant on the given tets."""
    p = mesh.nodes[mesh.tets[tet_ids]]
    f = vals[mesh.tets[tet_ids]]
    E = p[:, 1:] - p[:, :1]
    rhs = f[:, 1:] - f[:, :1]
    return np.linalg.solve(E, rhs[..., None])[..., 0]


def extract_raw(mesh: TetMesh, field: NodalField) -> RawSurface:
    """Cut all tets with a strict sign pattern into oriented planar polygons.

    Returns a RawSurface whose cut vertices are deduplicated across tets by
    their global grid-edge key.  A field with one sign everywhere yields an
    empty surface; exact nodal zeros raise (snap first).
    """
    tri_tets, tri_edges, quad_tets, quad_edges = _cut_polygons(mesh, field)
    vals = field.values
    n_nodes = mesh.n_nodes

    all_edges = np.concatenate(
        [tri_edges.reshape(-1, 2), quad_edges.reshape(-1, 2)], axis=0
    )
    if len(all_edges) == 0:
        empty = CutVertexTable(
            edges=np.zeros((0, 2), np.int64),
            t=np.zeros(0),
            points=np.zeros((0, 3)),
        )
        return RawSurface(
            vertices=empty,
            tris=np.zeros((0, 3), np.int64),
            tri_parent=np.zeros(0, np.int64),
            quads=np.zeros((0, 4), np.int64),
            quad_parent=np.zeros(0, np.int64),
        )

    a = np.minimum(all_edges[:, 0], all_edges[:, 1])
    b = np.maximum(all_edges[:, 0], all_edges[:, 1])
    keys = a * np.int64(n_nodes) + b
    uniq, inverse = np.unique(keys, return_inverse=True)

    ua = (uniq // n_nodes).astype(np.int64)
    ub = (uniq % n_nodes).astype(np.int64)
    fa, fb = vals[ua], vals[ub]
    if np.any(fa * fb >= 0):
        raise AssertionError("internal error: cut edge without sign change")
    t = fa / (fa - fb)
    points = (1.0 - t)[:, None] * mesh.nodes[ua] + t[:, None] * mesh.nodes[ub]

    table = CutVertexTable(edges=np.column_stack([ua, ub]), t=t, points=points)

    n_tri = len(tri_tets)
    tris = inverse[: 3 * n_tri].reshape(-1, 3).astype(np.int64)
    quads = inverse[3 * n_tri:].reshape(-1, 4).astype(np.int64)

    # orient: polygon normal (from the cyclic order) must point along the
    # field gradient, i.e. from phi < 0 to phi > 0
    if n_tri:
        g = _tet_gradients(mesh, vals, tri_tets)
        p = points[tris]
        nrm = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        flip = np.einsum("ij,ij->i", nrm, g) < 0
        tris[flip] = tris[flip][:, [0, 2, 1]]
    if len(quad_tets):
        g = _tet_gradients(mesh, vals, quad_tets)
        p = points[quads]
        nrm = np.cross(p[:, 2] - p[:, 0], p[:, 3] - p[:, 1])
        flip = np.einsum("ij,ij->i", nrm, g) < 0
        quads[flip] = quads[flip][:, [0, 3, 2, 1]]

    return RawSurface(
        vertices=table,
        tris=tris,
        tri_parent=tri_tets.astype(np.int64),
        quads=quads,
        quad_parent=quad_tets.astype(np.int64),
    )


def plane_residuals(mesh: TetMesh, field: NodalField, raw: RawSurface) -> np.ndarray:
    """Distance of every polygon corner from its parent tet's zero plane.

    The cut plane inside a tet is {phi_h = 0} with phi_h linear, so the
    residual is |phi_h(x)| / |grad phi_h| evaluated on the parent tet.  All
    residuals vanish up to roundoff for a correct extraction; this stays
    well conditioned even for sliver polygons, unlike a plane fitted
    through three nearly collinear corners.
    """
    vals = field.values
    out = []
    for polys, parent in ((raw.tris, raw.tri_parent), (raw.quads, raw.quad_parent)):
        if not len(polys):
            continue
        g = _tet_gradients(mesh, vals, parent)
        base = mesh.tets[parent][:, 0]
        x0 = mesh.nodes[base]
        f0 = vals[base]
        p = raw.vertices.points[polys]
        phi = f0[:, None] + np.einsum("ik,ijk->ij", g, p - x0[:, None, :])
        out.append(np.abs(phi) / np.linalg.norm(g, axis=1)[:, None])
    if not out:
        return np.zeros(0)
    return np.concatenate([r.ravel() for r in out])


def _quad_angles(q: np.ndarray) -> np.ndarray:
    """Inner angles of planar quads given corner positions (N, 4, 3)."""
    ang = np.empty(q.shape[:2])
    for i in range(4):
        u = q[:, (i - 1) % 4] - q[:, i]
        v = q[:, (i + 1) % 4] - q[:, i]
        cr = np.linalg.norm(np.cross(u, v), axis=1)
        dt = np.einsum("ij,ij->i", u, v)
        ang[:, i] = np.arctan2(cr, dt)
    return ang


def _split_quads_batch(quad_ids: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Split quads at their largest inner angle; returns (N, 2, 3) ids.

    The largest-angle corner is connected to the opposite corner; exact
    angle ties resolve to the corner with the smallest global vertex id.
    Both halves keep the quad's cyclic orientation.
    """
    q = points[quad_ids]
    ang = _quad_angles(q)
    amax = ang.max(axis=1)
    tied = ang == amax[:, None]
    cand = np.where(tied, quad_ids, np.iinfo(np.int64).max)
    m = cand.argmin(axis=1)

    idx = (m[:, None] + np.arange(4)[None, :]) % 4
    rot = np.take_along_axis(quad_ids, idx, axis=1)
    out = np.empty((len(quad_ids), 2, 3), dtype=np.int64)
    out[:, 0] = rot[:, [0, 1, 2]]
    out[:, 1] = rot[:, [0, 2, 3]]
    return out


def split_quad(quad_ids: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Split one cyclic quad into two triangles (max-angle rule), (2, 3) ids."""
    quad_ids = np.asarray(quad_ids, dtype=np.int64).reshape(1, 4)
    return _split_quads_batch(quad_ids, np.asarray(points, dtype=float))[0]


def extract_surface(mesh: TetMesh, field: NodalField) -> SurfaceMesh:
    """Extract the watertight oriented triangulation of {phi_h = 0}.

    Runs the raw per-tet cut, then splits every quadrilateral along the
    diagonal at its largest inner angle.  Triangles are ordered by parent
    tet (quad halves adjacent), vertices by grid-edge key; the result is a
    pure function of the inputs.
    """
    raw = extract_raw(mesh, field)
    pts = raw.vertices.points

    parts = [raw.tris]
    parents = [raw.tri_parent]
    halves = [np.zeros(len(raw.tris), np.int64)]
    from_quad = [np.zeros(len(raw.tris), bool)]
    if len(raw.quads):
        split = _split_quads_batch(raw.quads, pts)
        parts.append(split.reshape(-1, 3))
        parents.append(np.repeat(raw.quad_parent, 2))
        halves.append(np.tile(np.array([0, 1], np.int64), len(raw.quads)))
        from_quad.append(np.ones(2 * len(raw.quads), bool))

    tris = np.concatenate(parts, axis=0)
    parent = np.concatenate(parents)
    half = np.concatenate(halves)
    fq = np.concatenate(from_quad)

    order = np.lexsort((half, parent))
    return SurfaceMesh(
        vertices=pts,
        triangles=tris[order],
        vertex_edges=raw.vertices.edges,
        vertex_t=raw.vertices.t,
        tri_parent=parent[order],
        tri_from_quad=fq[order],
        h=mesh.h,
    )
