"""Uniform tetrahedral grids of a box.

Each grid cube is subdivided into the six Kuhn tetrahedra sharing the cube's
main diagonal, so neighbouring cubes match face-to-face and the mesh is
conforming by construction.  Nodes are indexed lexicographically with x
running fastest.  The module also provides the two shape metrics used for
stability statements: the enclosing/inscribed ball-diameter ratio and the
minimum angle over face angles and edge-to-opposite-face angles.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BoxDomain",
    "TetMesh",
    "build_uniform_mesh",
    "tet_volumes",
    "shape_regularity",
    "min_angle_theta",
    "tet_face_angles",
    "tet_edge_face_angles",
]

# Kuhn subdivision of the unit cube with corners numbered
#   0:(0,0,0) 1:(1,0,0) 2:(0,1,0) 3:(1,1,0) 4:(0,0,1) 5:(1,0,1) 6:(0,1,1) 7:(1,1,1)
# All six tets share the main diagonal 0-7; vertex order chosen so every
# signed volume is positive.
_KUHN_TETS = np.array(
    [
        [0, 1, 3, 7],
        [0, 5, 1, 7],
        [0, 3, 2, 7],
        [0, 2, 6, 7],
        [0, 4, 5, 7],
        [0, 6, 4, 7],
    ],
    dtype=np.int64,
)

_CORNER_OFFSETS = np.array(
    [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0],
     [0, 0, 1], [1, 0, 1], [0, 1, 1], [1, 1, 1]],
    dtype=np.int64,
)

# local vertex triples of the face opposite each vertex
_OPP_FACES = np.array([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]], dtype=np.int64)


@dataclass(frozen=True)
class BoxDomain:
    """Axis-aligned box [lo, hi] in R^3."""

    lo: tuple[float, float, float]
    hi: tuple[float, float, float]

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != (3,) or hi.shape != (3,):
            raise ValueError("BoxDomain expects two 3-vectors")
        if not np.all(hi > lo):
            raise ValueError(f"empty box: lo={self.lo}, hi={self.hi}")
        object.__setattr__(self, "lo", tuple(float(v) for v in lo))
        object.__setattr__(self, "hi", tuple(float(v) for v in hi))

    @property
    def extents(self) -> np.ndarray:
        return np.asarray(self.hi) - np.asarray(self.lo)

    @property
    def volume(self) -> float:
        return float(np.prod(self.extents))


@dataclass
class TetMesh:
    """Conforming tetrahedral mesh of a box.

    Attributes
    ----------
    nodes : (N, 3) float array
        Node coordinates, lexicographic order (x fastest, then y, then z).
    tets : (M, 4) int array
        Node indices per tetrahedron, positively oriented.
    h : float
        Grid spacing (cube edge length).
    box : BoxDomain
        The meshed domain.
    n_cells : (3,) ints
        Number of grid cubes per axis.
    """

    nodes: np.ndarray
    tets: np.ndarray
    h: float
    box: BoxDomain
    n_cells: tuple[int, int, int] = field(default=(0, 0, 0))

    def __post_init__(self):
        self.nodes = np.ascontiguousarray(self.nodes, dtype=np.float64)
        self.tets = np.ascontiguousarray(self.tets, dtype=np.int64)
        if self.nodes.ndim != 2 or self.nodes.shape[1] != 3:
            raise ValueError("nodes must be (N, 3)")
        if self.tets.ndim != 2 or self.tets.shape[1] != 4:
            raise ValueError("tets must be (M, 4)")
        if self.tets.size and (self.tets.min() < 0 or self.tets.max() >= len(self.nodes)):
            raise ValueError("tet indices out of range")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_tets(self) -> int:
        return len(self.tets)

    def tet_coords(self) -> np.ndarray:
        """Vertex coordinates per tet, shape (M, 4, 3)."""
        return self.nodes[self.tets]

    def face_multiplicities(self) -> np.ndarray:
        """Occurrence count of every distinct triangular face.

        Conformity means each count is 1 (boundary face) or 2 (interior face).
        """
        faces = self.tets[:, _OPP_FACES].reshape(-1, 3)
        faces = np.sort(faces, axis=1)
        _, counts = np.unique(faces, axis=0, return_counts=True)
        return counts


def build_uniform_mesh(box: BoxDomain, h: float) -> TetMesh:
    """Build the uniform Kuhn mesh of ``box`` with spacing ``h``.

    Every grid cube is split into 6 tetrahedra sharing the cube diagonal from
    its lowest to its highest corner; all cubes use the same diagonal
    direction so shared faces coincide and the mesh is conforming.

    Parameters
    ----------
    box : BoxDomain
    h : float
        Cube edge length.  Must divide every box extent to within a 1e-9
        relative tolerance.

    Returns
    -------
    TetMesh
    """
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    ext = box.extents
    n_cells = np.round(ext / h).astype(np.int64)
    if np.any(n_cells < 1) or np.any(np.abs(n_cells * h - ext) > 1e-9 * np.abs(ext)):
        raise ValueError(
            f"h={h} does not divide the box extents {tuple(ext)} evenly"
        )
    nx, ny, nz = (int(v) for v in n_cells)

    # lexicographic nodes, x fastest
    xs = np.asarray(box.lo)[0] + h * np.arange(nx + 1)
    ys = np.asarray(box.lo)[1] + h * np.arange(ny + 1)
    zs = np.asarray(box.lo)[2] + h * np.arange(nz + 1)
    Z, Y, X = np.meshgrid(zs, ys, xs, indexing="ij")
    nodes = np.column_stack([X.ravel(), Y.ravel(), Z.ravel()])

    # cube lattice indices, x fastest as well
    ck, cj, ci = np.meshgrid(
        np.arange(nz), np.arange(ny), np.arange(nx), indexing="ij"
    )
    ci = ci.ravel()
    cj = cj.ravel()
    ck = ck.ravel()

    def node_id(i, j, k):
        return i + (nx + 1) * (j + (ny + 1) * k)

    # (n_cubes, 8) node ids of cube corners
    corners = np.stack(
        [node_id(ci + dx, cj + dy, ck + dz) for dx, dy, dz in _CORNER_OFFSETS],
        axis=1,
    )
    # (n_cubes, 6, 4) -> (6 * n_cubes, 4), cube-major then pattern order
    tets = corners[:, _KUHN_TETS].reshape(-1, 4)

    return TetMesh(nodes=nodes, tets=tets, h=float(h), box=box,
                   n_cells=(nx, ny, nz))


def tet_volumes(mesh: TetMesh) -> np.ndarray:
    """Signed volumes of all tets (positive for correctly oriented meshes)."""
    p = mesh.tet_coords()
    e = p[:, 1:] - p[:, :1]
    return np.linalg.det(e) / 6.0


def _check_nondegenerate(vol: np.ndarray, scale: float) -> None:
    bad = np.flatnonzero(np.abs(vol) <= 1e-14 * scale**3)
    if bad.size:
        raise ValueError(f"degenerate tetrahedron at index {bad[0]}")


def _enclosing_ball_diameters(p: np.ndarray) -> np.ndarray:
    """Diameter of the smallest ball containing each tet.

    ``p`` has shape (M, 4, 3).  Candidates: balls spanned by each edge
    (diameter = edge), circumcircles of each face, and the circumsphere;
    the smallest candidate containing all four vertices wins.
    """
    M = len(p)
    tol = 1.0 + 1e-12
    best = np.full(M, np.inf)

    pairs = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]
    for a, b in pairs:
        c = 0.5 * (p[:, a] + p[:, b])
        r = 0.5 * np.linalg.norm(p[:, a] - p[:, b], axis=1)
        ok = np.ones(M, dtype=bool)
        for o in range(4):
            if o in (a, b):
                continue
            ok &= np.linalg.norm(p[:, o] - c, axis=1) <= r * tol + 1e-300
        best = np.where(ok, np.minimum(best, r), best)

    for tri in ([0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]):
        o = ({0, 1, 2, 3} - set(tri)).pop()
        u = p[:, tri[1]] - p[:, tri[0]]
        v = p[:, tri[2]] - p[:, tri[0]]
        uu = np.einsum("ij,ij->i", u, u)
        vv = np.einsum("ij,ij->i", v, v)
        uv = np.einsum("ij,ij->i", u, v)
        det = uu * vv - uv * uv
        safe = np.abs(det) > 1e-300
        alpha = np.where(safe, (0.5 * (uu * vv - vv * uv)) / np.where(safe, det, 1.0), 0.0)
        beta = np.where(safe, (0.5 * (uu * vv - uu * uv)) / np.where(safe, det, 1.0), 0.0)
        c = p[:, tri[0]] + alpha[:, None] * u + beta[:, None] * v
        r = np.linalg.norm(p[:, tri[0]] - c, axis=1)
        ok = safe & (np.linalg.norm(p[:, o] - c, axis=1) <= r * tol + 1e-300)
        best = np.where(ok, np.minimum(best, r), best)

    # circumsphere: 2 (p_i - p_0) . c = |p_i|^2 - |p_0|^2
    A = 2.0 * (p[:, 1:] - p[:, :1])
    rhs = np.einsum("ijk,ijk->ij", p[:, 1:], p[:, 1:]) - np.einsum(
        "ik,ik->i", p[:, 0], p[:, 0]
    )[:, None]
    c = np.linalg.solve(A, rhs[..., None])[..., 0]
    r = np.linalg.norm(p[:, 0] - c, axis=1)
    best = np.minimum(best, r)

    return 2.0 * best


def shape_regularity(mesh: TetMesh, per_tet: bool = False):
    """Ball-diameter ratio max_S rho(S)/r(S).

    rho(S) is the diameter of the smallest ball containing S, r(S) the
    diameter of the largest ball contained in S (2 * 3V / sum of face areas).

    Returns the maximum over all tets, or the per-tet array if ``per_tet``.
    """
    p = mesh.tet_coords()
    vol = np.abs(np.linalg.det(p[:, 1:] - p[:, :1])) / 6.0
    _check_nondegenerate(vol, scale=max(mesh.h, 1e-30))

    area_sum = np.zeros(len(p))
    for tri in ([0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]):
        u = p[:, tri[1]] - p[:, tri[0]]
        v = p[:, tri[2]] - p[:, tri[0]]
        area_sum += 0.5 * np.linalg.norm(np.cross(u, v), axis=1)
    inscribed = 2.0 * 3.0 * vol / area_sum

    ratio = _enclosing_ball_diameters(p) / inscribed
    return ratio if per_tet else float(ratio.max())


def tet_face_angles(mesh: TetMesh) -> np.ndarray:
    """All 12 face angles per tet (4 faces x 3 corners), radians, (M, 12)."""
    p = mesh.tet_coords()
    out = np.empty((len(p), 12))
    col = 0
    for tri in _OPP_FACES:
        for i in range(3):
            a = p[:, tri[i]]
            u = p[:, tri[(i + 1) % 3]] - a
            v = p[:, tri[(i + 2) % 3]] - a
            cr = np.linalg.norm(np.cross(u, v), axis=1)
            dt = np.einsum("ij,ij->i", u, v)
            out[:, col] = np.arctan2(cr, dt)
            col += 1
    return out


def tet_edge_face_angles(mesh: TetMesh) -> np.ndarray:
    """Angles between each edge at a vertex and the opposite face's plane.

    For every vertex v and each of the 3 edges meeting v, the angle between
    that edge and the plane of the face opposite v: 12 angles per tet,
    radians, shape (M, 12).
    """
    p = mesh.tet_coords()
    out = np.empty((len(p), 12))
    col = 0
    for v in range(4):
        tri = _OPP_FACES[v]
        n = np.cross(p[:, tri[1]] - p[:, tri[0]], p[:, tri[2]] - p[:, tri[0]])
        nn = np.linalg.norm(n, axis=1)
        if np.any(nn <= 1e-300):
            raise ValueError("degenerate tetrahedron face")
        n = n / nn[:, None]
        for w in tri:
            d = p[:, w] - p[:, v]
            d = d / np.linalg.norm(d, axis=1)[:, None]
            s = np.abs(np.einsum("ij,ij->i", d, n))
            out[:, col] = np.arcsin(np.clip(s, -1.0, 1.0))
            col += 1
    return out


def min_angle_theta(mesh: TetMesh) -> float:
    """Minimum over all tets of face angles and edge-to-opposite-face angles.

    Returns radians; for the Kuhn mesh the value is pi/6 independent of h.
    """
    return float(
        min(tet_face_angles(mesh).min(), tet_edge_face_angles(mesh).min())
    )
