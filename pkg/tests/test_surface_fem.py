import numpy as np
import numpy.testing as npt
import pytest
import sympy

from levelsurf.level_set import (
    SphereLevelSet,
    constant_function,
    coordinate_function,
    product_arctan_function,
)
from levelsurf.surface_extract import SurfaceMesh
from levelsurf.surface_fem import (
    TRI_QP_BARY,
    TRI_QP_WEIGHTS,
    assemble_mass,
    assemble_stiffness,
    diag_scale,
    dirichlet_energy,
    h1_semi_error,
    interpolate,
    l2_error,
    vertex_support_areas,
)
from levelsurf.level_set import SurfaceFunction

MASS_BOUND = 2.0 * (2.0 + np.sqrt(2.0))  # 6.8284...


def _sympy_mass_reference():
    """Exact integrals of barycentric products over the reference triangle."""
    x, y = sympy.symbols("x y")
    lam = (1 - x - y, x, y)
    out = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            val = sympy.integrate(lam[i] * lam[j], (y, 0, 1 - x), (x, 0, 1))
            out[i, j] = float(val)
    return out


SYMPY_MASS = _sympy_mass_reference()  # (1 + delta_ij) / 24


def one_tri_surface(p):
    return SurfaceMesh.from_arrays(np.asarray(p, dtype=float), np.array([[0, 1, 2]]))


def flat_patch(n=4):
    """Right-triangle mesh of the unit square embedded at z=0."""
    g = np.linspace(0.0, 1.0, n + 1)
    xx, yy = np.meshgrid(g, g, indexing="ij")
    verts = np.column_stack([xx.ravel(), yy.ravel(), np.zeros((n + 1) ** 2)])
    tris = []
    for i in range(n):
        for j in range(n):
            a = i * (n + 1) + j
            b = (i + 1) * (n + 1) + j
            tris.append([a, b, b + 1])
            tris.append([a, b + 1, a + 1])
    return SurfaceMesh.from_arrays(verts, np.array(tris), h=1.0 / n)


def test_sympy_mass_reference_pattern():
    expected = (np.ones((3, 3)) + np.eye(3)) / 24.0
    npt.assert_allclose(SYMPY_MASS, expected, rtol=1e-14)


def test_quadrature_degree_4_exact():
    # On the reference triangle the rule must integrate x^a y^b exactly
    # for a + b <= 4; exact value is a! b! / (a + b + 2)!.
    for a in range(5):
        for b in range(5 - a):
            quad = float(
                (TRI_QP_BARY[:, 1] ** a * TRI_QP_BARY[:, 2] ** b) @ TRI_QP_WEIGHTS
            ) * 0.5
            exact = float(
                sympy.factorial(a) * sympy.factorial(b) / sympy.factorial(a + b + 2)
            )
            npt.assert_allclose(quad, exact, rtol=1e-12)


def test_quadrature_weights_positive():
    assert (TRI_QP_WEIGHTS > 0).all()
    assert (TRI_QP_BARY > 0).all() and (TRI_QP_BARY < 1).all()
    npt.assert_allclose(TRI_QP_BARY.sum(axis=1), 1.0, rtol=1e-14)


def test_mass_element_matrix_random():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = rng.standard_normal((3, 3))
        area = 0.5 * np.linalg.norm(np.cross(p[1] - p[0], p[2] - p[0]))
        if area < 1e-3:
            continue
        M = assemble_mass(one_tri_surface(p)).toarray()
        npt.assert_allclose(M, 2.0 * area * SYMPY_MASS, rtol=1e-13)


def test_stiffness_unit_right_triangle():
    A = assemble_stiffness(
        one_tri_surface([[0, 0, 0], [1, 0, 0], [0, 1, 0]])
    ).toarray()
    expected = np.array([[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]])
    npt.assert_allclose(A, expected, rtol=1e-13, atol=1e-15)


def test_stiffness_element_direct_gradient():
    # Independent oracle: A_ij = area * grad(lam_i) . grad(lam_j) with the
    # barycentric gradients solved from lam_i(p_j) = delta_ij in-plane.
    rng = np.random.default_rng(7)
    for _ in range(20):
        p = rng.standard_normal((3, 3))
        e0, e1 = p[1] - p[0], p[2] - p[0]
        area = 0.5 * np.linalg.norm(np.cross(e0, e1))
        if area < 1e-3:
            continue
        E = np.stack([e0, e1])
        grads = np.empty((3, 3))
        for i, rhs in enumerate(([-1.0, -1.0], [1.0, 0.0], [0.0, 1.0])):
            grads[i], *_ = np.linalg.lstsq(E, np.asarray(rhs), rcond=None)
        expected = area * grads @ grads.T
        A = assemble_stiffness(one_tri_surface(p)).toarray()
        npt.assert_allclose(A, expected, rtol=1e-10, atol=1e-13)


def test_stiffness_sliver_diagonal_growth():
    # Triangle with min angle eps has a diagonal entry ~ cot(eps) / 2.
    diags = {}
    for eps in (1e-2, 1e-4):
        p = [[0, 0, 0], [1, 0, 0], [np.cos(eps), np.sin(eps), 0]]
        diags[eps] = assemble_stiffness(one_tri_surface(p)).diagonal().max()
    expected_ratio = np.tan(1e-2) / np.tan(1e-4)  # cot(1e-4)/cot(1e-2) ~ 1e2
    npt.assert_allclose(diags[1e-4] / diags[1e-2], expected_ratio, rtol=1e-2)


def test_matrices_exactly_symmetric(sphere_h4):
    _, surf = sphere_h4
    for A in (assemble_mass(surf), assemble_stiffness(surf)):
        assert abs(A - A.T).max() == 0.0


def test_stiffness_rowsums_zero(sphere_h8):
    _, surf = sphere_h8
    A = assemble_stiffness(surf)
    ones = np.ones(surf.n_vertices)
    assert np.abs(A @ ones).max() <= 1e-12 * A.diagonal().max()


def test_stiffness_spectrum(sphere_h4_shifted):
    # Snapped extraction: bounded aspect ratios keep the eigenvalue scales
    # clean enough to separate the constant kernel from the rest.
    _, surf = sphere_h4_shifted
    A = assemble_stiffness(surf).toarray()
    w = np.linalg.eigvalsh(A)
    assert abs(w[0]) <= 1e-10 * w[-1]   # kernel: constants
    assert w[1] > 1e-6 * w[-1]          # one-dimensional kernel only


def test_mass_row_sums(sphere_h4):
    _, surf = sphere_h4
    M = assemble_mass(surf)
    rows = np.asarray(M @ np.ones(surf.n_vertices))
    npt.assert_allclose(rows, vertex_support_areas(surf) / 3.0, rtol=1e-12)
    npt.assert_allclose(M.sum(), surf.areas().sum(), rtol=1e-12)


def test_mass_positive_definite(sphere_h4):
    _, surf = sphere_h4
    w = np.linalg.eigvalsh(assemble_mass(surf).toarray())
    assert w[0] > 0.0


def test_mass_rayleigh_ratio_bounds(sphere_h4):
    _, surf = sphere_h4
    M = assemble_mass(surf)
    d = M.diagonal()
    rng = np.random.default_rng(11)
    lo, hi = (2.0 - np.sqrt(2.0)) / 2.0, 2.0
    for _ in range(50):
        v = rng.standard_normal(surf.n_vertices)
        ratio = (v @ (M @ v)) / (v @ (d * v))
        assert lo - 1e-12 <= ratio <= hi + 1e-12


def test_galerkin_energy_identity(sphere_h4):
    # Sliver triangles push entries to ~1e9, so the two summation orders
    # agree only to accumulated roundoff at that scale.
    _, surf = sphere_h4
    A = assemble_stiffness(surf)
    rng = np.random.default_rng(2)
    for _ in range(5):
        v = rng.standard_normal(surf.n_vertices)
        npt.assert_allclose(v @ (A @ v), dirichlet_energy(surf, v), rtol=1e-8)


def test_diag_scale_identity():
    import scipy.sparse as sp

    S, d = diag_scale(sp.eye(5, format="csr"))
    npt.assert_allclose(S.toarray(), np.eye(5))
    npt.assert_allclose(d, 1.0)


def test_diag_scale_2x2():
    import scipy.sparse as sp

    S, d = diag_scale(sp.csr_matrix(np.array([[4.0, 2.0], [2.0, 4.0]])))
    npt.assert_allclose(S.toarray(), [[1.0, 0.5], [0.5, 1.0]], rtol=1e-15)
    npt.assert_allclose(d, [4.0, 4.0])


def test_diag_scale_mass(sphere_h4):
    _, surf = sphere_h4
    Ms, d = diag_scale(assemble_mass(surf))
    diag = Ms.diagonal()
    assert (diag == 1.0).all()
    assert abs(Ms - Ms.T).max() <= 1e-15
    off = Ms.copy()
    off.setdiag(0.0)
    assert abs(off).max() < 1.0       # Cauchy-Schwarz for a Gram matrix
    npt.assert_allclose(d, assemble_mass(surf).diagonal())


def test_diag_scale_rejects_nonpositive():
    import scipy.sparse as sp

    A = sp.csr_matrix(np.array([[1.0, 0.0], [0.0, 0.0]]))
    with pytest.raises(ValueError, match="row 1"):
        diag_scale(A)


@pytest.mark.parametrize("fixture", ["sphere_h4", "sphere_h8_shifted"])
def test_scaled_mass_condition_bound(fixture, request):
    _, surf = request.getfixturevalue(fixture)
    Ms, _ = diag_scale(assemble_mass(surf))
    w = np.linalg.eigvalsh(Ms.toarray())
    assert w[-1] / w[0] <= MASS_BOUND


def test_scaled_mass_condition_bound_flat_patch():
    Ms, _ = diag_scale(assemble_mass(flat_patch(6)))
    w = np.linalg.eigvalsh(Ms.toarray())
    assert w[-1] / w[0] <= MASS_BOUND


def test_interpolate_constant(sphere_h4):
    spec, surf = sphere_h4
    npt.assert_allclose(interpolate(constant_function(1.0), spec, surf), 1.0)


def test_interpolate_coordinate_on_sphere(sphere_h4):
    spec, surf = sphere_h4
    coeffs = interpolate(coordinate_function(2), spec, surf)
    v = surf.vertices
    npt.assert_allclose(coeffs, v[:, 2] / np.linalg.norm(v, axis=1), rtol=1e-13)


def test_interpolate_extension_constancy():
    # The extension is constant along sphere normals, so two vertices on the
    # same ray get the same coefficient.
    spec = SphereLevelSet()
    u = product_arctan_function()
    v = np.array([1.0, 1.0, 1.0]) / np.sqrt(3.0)
    surf = SurfaceMesh.from_arrays(
        np.stack([v, 1.1 * v, [1.0, 0.0, 0.0]]), np.array([[0, 1, 2]])
    )
    coeffs = interpolate(u, spec, surf)
    npt.assert_allclose(coeffs[0], coeffs[1], rtol=1e-12)


def test_error_norms_reject_bad_coeffs(sphere_h4):
    spec, surf = sphere_h4
    u = product_arctan_function()
    with pytest.raises(ValueError):
        l2_error(u, spec, surf, np.zeros(3))
    with pytest.raises(ValueError):
        h1_semi_error(u, spec, surf, np.zeros(3))


def test_constant_interpolated_exactly(sphere_h4):
    spec, surf = sphere_h4
    u = constant_function(2.5)
    coeffs = interpolate(u, spec, surf)
    assert l2_error(u, spec, surf, coeffs) <= 1e-13
    assert h1_semi_error(u, spec, surf, coeffs) <= 1e-9


def test_affine_reproduced_on_flat_patch():
    surf = flat_patch(4)
    a = np.array([0.7, -0.3, 0.0])
    u = SurfaceFunction(value=lambda p: np.asarray(p) @ a + 0.2)
    coeffs = interpolate(u, None, surf)
    assert l2_error(u, None, surf, coeffs) <= 1e-13
    assert h1_semi_error(u, None, surf, coeffs) <= 1e-8


def test_h1_fd_step_robust(sphere_h4):
    spec, surf = sphere_h4
    u = product_arctan_function()
    coeffs = interpolate(u, spec, surf)
    e1 = h1_semi_error(u, spec, surf, coeffs, fd_step_rel=1e-6)
    e2 = h1_semi_error(u, spec, surf, coeffs, fd_step_rel=1e-5)
    npt.assert_allclose(e1, e2, rtol=1e-6)


def _h1_error_chain_rule(u, sphere, surface, coeffs):
    """H1 seminorm oracle using the analytic gradient of the extension.

    D(u o p)(x) = (r/|x-c|) (I - yhat yhat^T) Du(p(x)); the error integrand
    compares its in-plane part with the P1 gradient solved per triangle.
    """
    p = surface.tri_coords()
    e0, e1 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
    n = np.cross(e0, e1)
    two_area = np.linalg.norm(n, axis=1)
    nh = n / two_area[:, None]

    c = coeffs[surface.triangles]
    g = np.empty((len(p), 3))
    for f in range(len(p)):
        E = np.stack([e0[f], e1[f]])
        rhs = np.array([c[f, 1] - c[f, 0], c[f, 2] - c[f, 0]])
        g[f], *_ = np.linalg.lstsq(E, rhs, rcond=None)

    qp = np.einsum("qk,fkj->fqj", TRI_QP_BARY, p)
    x = qp.reshape(-1, 3)
    y = x - np.asarray(sphere.center)
    ny = np.linalg.norm(y, axis=1, keepdims=True)
    yhat = y / ny
    Du = u.gradient(np.asarray(sphere.center) + sphere.radius * yhat)
    g_ext = (sphere.radius / ny) * (
        Du - yhat * np.einsum("ij,ij->i", Du, yhat)[:, None]
    )
    g_ext = g_ext.reshape(len(p), 6, 3)
    g_t = g_ext - nh[:, None, :] * np.einsum("fqj,fj->fq", g_ext, nh)[..., None]
    diff = g_t - g[:, None, :]
    diff2 = np.einsum("fqj,fqj->fq", diff, diff)
    return float(np.sqrt(((diff2 @ TRI_QP_WEIGHTS) * 0.5 * two_area).sum()))


def test_h1_matches_chain_rule_oracle(sphere_h4):
    spec, surf = sphere_h4
    u = product_arctan_function()
    coeffs = interpolate(u, spec, surf)
    fd = h1_semi_error(u, spec, surf, coeffs)
    analytic = _h1_error_chain_rule(u, spec, surf, coeffs)
    npt.assert_allclose(fd, analytic, rtol=1e-6)


def test_interpolation_orders_loose(sphere_h4, sphere_h8):
    from conftest import sphere_surface

    u = product_arctan_function()
    errs = []
    for spec, surf in (sphere_surface(0.5), sphere_h4, sphere_h8):
        coeffs = interpolate(u, spec, surf)
        errs.append(
            (l2_error(u, spec, surf, coeffs), h1_semi_error(u, spec, surf, coeffs))
        )
    e = np.asarray(errs)
    assert (np.diff(e[:, 0]) < 0).all() and (np.diff(e[:, 1]) < 0).all()
    l2_orders = np.log2(e[:-1, 0] / e[1:, 0])
    h1_orders = np.log2(e[:-1, 1] / e[1:, 1])
    assert ((l2_orders > 1.5) & (l2_orders < 2.5)).all()
    assert ((h1_orders > 0.6) & (h1_orders < 1.4)).all()
