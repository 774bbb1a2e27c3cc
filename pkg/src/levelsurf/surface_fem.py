"""P1 finite elements on surface triangulations.

Mass matrices use the exact element integrals |T| (1 + delta_ij) / 12;
stiffness matrices use the cotangent formula with zero row sums.  Diagonal
scaling D^{-1/2} A D^{-1/2} produces a unit-diagonal matrix whose spectrum
is what the conditioning statements are about.  Interpolation errors
against a smooth surface function are evaluated with a 6-point
degree-4 triangle quadrature; the reference surface gradient is taken by
central finite differences inside each triangle's plane.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .level_set import SurfaceFunction, closest_point
from .surface_extract import SurfaceMesh

__all__ = [
    "DofMap",
    "TRI_QP_BARY",
    "TRI_QP_WEIGHTS",
    "interpolate",
    "l2_error",
    "h1_semi_error",
    "assemble_mass",
    "assemble_stiffness",
    "diag_scale",
    "dirichlet_energy",
    "vertex_support_areas",
]

# Symmetric 6-point triangle rule, exact for polynomials of degree 4.
# Weights are normalized to sum to 1 (multiply by the triangle area).
_A1, _W1 = 0.445948490915965, 0.223381589678011
_A2, _W2 = 0.091576213509771, 0.109951743655322
TRI_QP_BARY = np.array(
    [
        [1.0 - 2.0 * _A1, _A1, _A1],
        [_A1, 1.0 - 2.0 * _A1, _A1],
        [_A1, _A1, 1.0 - 2.0 * _A1],
        [1.0 - 2.0 * _A2, _A2, _A2],
        [_A2, 1.0 - 2.0 * _A2, _A2],
        [_A2, _A2, 1.0 - 2.0 * _A2],
    ]
)
TRI_QP_WEIGHTS = np.array([_W1, _W1, _W1, _W2, _W2, _W2])


@dataclass(frozen=True)
class DofMap:
    """Vertex index <-> matrix row map; the identity in this version."""

    n: int

    def vertex_to_dof(self, i):
        return i

    def dof_to_vertex(self, i):
        return i


def interpolate(u: SurfaceFunction, spec, surface: SurfaceMesh) -> np.ndarray:
    """Nodal coefficients of the interpolant of u's extension.

    With a sphere spec the vertices are projected to the surface first;
    with ``spec=None`` u is evaluated at the vertices directly (useful for
    flat test patches where the extension is the identity).
    """
    x = surface.vertices
    if spec is not None:
        x = closest_point(spec, x)
    return np.asarray(u.value(x), dtype=float)


def _extension_values(u: SurfaceFunction, spec, points: np.ndarray) -> np.ndarray:
    if spec is not None:
        points = closest_point(spec, points)
    return np.asarray(u.value(points), dtype=float)


def _tri_geometry(surface: SurfaceMesh):
    p = surface.tri_coords()
    e0 = p[:, 1] - p[:, 0]
    e1 = p[:, 2] - p[:, 0]
    n = np.cross(e0, e1)
    two_area = np.linalg.norm(n, axis=1)
    if np.any(two_area <= 0.0):
        raise ValueError("degenerate (zero-area) surface triangle")
    return p, n, two_area


def l2_error(u: SurfaceFunction, spec, surface: SurfaceMesh,
             coeffs: np.ndarray) -> float:
    """L2 norm of (extension of u) - (P1 field with the given coefficients)."""
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (surface.n_vertices,):
        raise ValueError("coefficient vector does not match the surface")
    p, _, two_area = _tri_geometry(surface)
    qp = np.einsum("qk,fkj->fqj", TRI_QP_BARY, p)        # (F, 6, 3)
    ue = _extension_values(u, spec, qp.reshape(-1, 3)).reshape(qp.shape[:2])
    vh = coeffs[surface.triangles] @ TRI_QP_BARY.T        # (F, 6)
    per_tri = ((ue - vh) ** 2 @ TRI_QP_WEIGHTS) * (0.5 * two_area)
    return float(np.sqrt(per_tri.sum()))


def h1_semi_error(u: SurfaceFunction, spec, surface: SurfaceMesh,
                  coeffs: np.ndarray, fd_step_rel: float = 1e-6) -> float:
    """H1 seminorm of the interpolation error, triangle by triangle.

    Both gradients are taken inside each triangle's plane: the P1 gradient
    is constant, the reference gradient of u's extension is approximated by
    central finite differences with step fd_step_rel * diam(T) along an
    orthonormal in-plane basis.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape != (surface.n_vertices,):
        raise ValueError("coefficient vector does not match the surface")
    p, n, two_area = _tri_geometry(surface)

    # orthonormal in-plane frame (b1, b2)
    b1 = p[:, 1] - p[:, 0]
    b1 = b1 / np.linalg.norm(b1, axis=1, keepdims=True)
    b2 = np.cross(n / two_area[:, None], b1)

    # constant in-plane gradient of the P1 field: sum_i c_i grad(lambda_i),
    # with grad(lambda_i) = n_hat x (opposite edge) / (2 A)
    nh = n / two_area[:, None]
    c = coeffs[surface.triangles]
    grad = (
        c[:, [0]] * np.cross(nh, p[:, 2] - p[:, 1])
        + c[:, [1]] * np.cross(nh, p[:, 0] - p[:, 2])
        + c[:, [2]] * np.cross(nh, p[:, 1] - p[:, 0])
    ) / two_area[:, None]
    gv1 = np.einsum("ij,ij->i", grad, b1)
    gv2 = np.einsum("ij,ij->i", grad, b2)

    edges = np.stack(
        [p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2]], axis=1
    )
    diam = np.linalg.norm(edges, axis=2).max(axis=1)
    step = (fd_step_rel * diam)[:, None, None]

    qp = np.einsum("qk,fkj->fqj", TRI_QP_BARY, p)

    def ext(pts):
        return _extension_values(u, spec, pts.reshape(-1, 3)).reshape(pts.shape[:2])

    du1 = (ext(qp + step * b1[:, None, :]) - ext(qp - step * b1[:, None, :])) / (
        2.0 * step[:, :, 0]
    )
    du2 = (ext(qp + step * b2[:, None, :]) - ext(qp - step * b2[:, None, :])) / (
        2.0 * step[:, :, 0]
    )

    diff2 = (du1 - gv1[:, None]) ** 2 + (du2 - gv2[:, None]) ** 2
    per_tri = (diff2 @ TRI_QP_WEIGHTS) * (0.5 * two_area)
    return float(np.sqrt(per_tri.sum()))


def _assemble(surface: SurfaceMesh, elem: np.ndarray) -> sp.csr_matrix:
    """Accumulate per-triangle 3x3 element matrices into CSR (both halves)."""
    tris = surface.triangles
    rows = np.repeat(tris, 3, axis=1).ravel()
    cols = np.tile(tris, (1, 3)).ravel()
    n = surface.n_vertices
    A = sp.coo_matrix((elem.ravel(), (rows, cols)), shape=(n, n))
    out = A.tocsr()
    out.sum_duplicates()
    out.sort_indices()
    return out


def assemble_mass(surface: SurfaceMesh) -> sp.csr_matrix:
    """P1 mass matrix, element integrals |T| (1 + delta_ij) / 12."""
    _, _, two_area = _tri_geometry(surface)
    base = (np.ones((3, 3)) + np.eye(3)) / 12.0
    elem = (0.5 * two_area)[:, None, None] * base[None, :, :]
    return _assemble(surface, elem)


def assemble_stiffness(surface: SurfaceMesh) -> sp.csr_matrix:
    """P1 stiffness (surface Laplacian) matrix via the cotangent formula.

    Off-diagonal (i, j) entries are -cot(angle opposite edge ij) / 2
    summed over the one or two triangles containing the edge; diagonals
    make every row sum vanish, so constants are in the kernel exactly.
    """
    p, _, _ = _tri_geometry(surface)
    cots = np.empty((len(p), 3))
    for k in range(3):
        u = p[:, (k + 1) % 3] - p[:, k]
        v = p[:, (k + 2) % 3] - p[:, k]
        cr = np.linalg.norm(np.cross(u, v), axis=1)
        cots[:, k] = np.einsum("ij,ij->i", u, v) / cr

    elem = np.zeros((len(p), 3, 3))
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        elem[:, i, j] = elem[:, j, i] = -0.5 * cots[:, k]
    for i in range(3):
        elem[:, i, i] = -(elem[:, i, :].sum(axis=1) - elem[:, i, i])
    return _assemble(surface, elem)


def diag_scale(A: sp.spmatrix) -> tuple[sp.csr_matrix, np.ndarray]:
    """Symmetric diagonal scaling D^{-1/2} A D^{-1/2}.

    Returns the scaled CSR matrix (diagonal set to exactly 1) and the
    original diagonal.  Raises when a diagonal entry is not positive.
    """
    A = A.tocsr()
    d = A.diagonal()
    if np.any(d <= 0):
        bad = int(np.argmin(d))
        raise ValueError(f"non-positive diagonal entry at row {bad}: {d[bad]}")
    s = 1.0 / np.sqrt(d)
    out = sp.diags(s) @ A @ sp.diags(s)
    out = out.tocsr()
    out.setdiag(1.0)
    out.sort_indices()
    return out, d


def dirichlet_energy(surface: SurfaceMesh, coeffs: np.ndarray) -> float:
    """Integral of |in-plane gradient|^2 of the P1 field, by direct quadrature.

    Independent of the cotangent assembly; equals <A c, c> up to roundoff.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    p, n, two_area = _tri_geometry(surface)
    nh = n / two_area[:, None]
    c = coeffs[surface.triangles]
    grad = (
        c[:, [0]] * np.cross(nh, p[:, 2] - p[:, 1])
        + c[:, [1]] * np.cross(nh, p[:, 0] - p[:, 2])
        + c[:, [2]] * np.cross(nh, p[:, 1] - p[:, 0])
    ) / two_area[:, None]
    return float((np.einsum("ij,ij->i", grad, grad) * 0.5 * two_area).sum())


def vertex_support_areas(surface: SurfaceMesh) -> np.ndarray:
    """Area of the triangle patch around each vertex (|supp phi_i|)."""
    _, _, two_area = _tri_geometry(surface)
    out = np.zeros(surface.n_vertices)
    np.add.at(out, surface.triangles.ravel(), np.repeat(0.5 * two_area, 3))
    return out
