import numpy as np
import numpy.testing as npt
import pytest

from levelsurf.tet_grid import (
    BoxDomain,
    TetMesh,
    build_uniform_mesh,
    min_angle_theta,
    shape_regularity,
    tet_edge_face_angles,
    tet_face_angles,
    tet_volumes,
)

# Frozen oracle values (brute force over all angles of the cube subdivision,
# and closed forms for the regular tetrahedron).
KUHN_ALPHA = np.sqrt(3.0) * (np.sqrt(2.0) + 1.0)          # ~4.18154
KUHN_MIN_ANGLE = np.radians(30.0)                          # edge-face minimum
KUHN_MIN_FACE_ANGLE = np.arctan(1.0 / np.sqrt(2.0))       # ~35.264 deg
REGULAR_MIN_ANGLE = np.arcsin(np.sqrt(2.0 / 3.0))          # ~54.736 deg


def unit_cube_mesh(h=1.0):
    return build_uniform_mesh(BoxDomain((0, 0, 0), (1, 1, 1)), h)


def regular_tet_mesh():
    # Alternate cube corners give a regular tetrahedron with edge sqrt(2).
    nodes = np.array([[0, 0, 0], [1, 1, 0], [1, 0, 1], [0, 1, 1]], dtype=float)
    return TetMesh(nodes, np.array([[0, 1, 2, 3]]), h=1.0,
                   box=BoxDomain((0, 0, 0), (1, 1, 1)))


def test_single_cube_counts():
    mesh = unit_cube_mesh()
    assert mesh.n_nodes == 8
    assert mesh.n_tets == 6


def test_box_counts():
    mesh = build_uniform_mesh(BoxDomain((-2, -2, -2), (2, 2, 2)), 0.5)
    assert mesh.n_nodes == 9 ** 3
    assert mesh.n_tets == 6 * 8 ** 3
    assert mesh.n_cells == (8, 8, 8)


def test_positive_orientation():
    mesh = build_uniform_mesh(BoxDomain((-2, -2, -2), (2, 2, 2)), 0.5)
    p = mesh.tet_coords()
    det = np.linalg.det(p[:, 1:] - p[:, :1])
    assert det.min() > 0.0


def test_volume_partition(mesh_h4):
    total = tet_volumes(mesh_h4).sum()
    npt.assert_allclose(total, mesh_h4.box.volume, rtol=1e-12)


def test_tet_volume_value():
    # Each Kuhn tet of a unit cube has volume 1/6.
    npt.assert_allclose(tet_volumes(unit_cube_mesh()), 1.0 / 6.0, rtol=1e-13)


def test_face_multiplicities():
    mesh = build_uniform_mesh(BoxDomain((0, 0, 0), (1, 1, 1)), 0.25)
    counts = mesh.face_multiplicities()
    assert set(counts.tolist()) <= {1, 2}
    n = 4
    assert (counts == 1).sum() == 12 * n ** 2   # 6 box faces, 2n^2 tris each


def test_nondivisible_box_rejected():
    with pytest.raises(ValueError):
        build_uniform_mesh(BoxDomain((0, 0, 0), (1, 1, 1)), 0.3)


def test_bad_h_rejected():
    with pytest.raises(ValueError):
        build_uniform_mesh(BoxDomain((0, 0, 0), (1, 1, 1)), -0.5)
    with pytest.raises(ValueError):
        build_uniform_mesh(BoxDomain((0, 0, 0), (1, 1, 1)), 0.0)


def test_bad_box_rejected():
    with pytest.raises(ValueError):
        BoxDomain((0, 0, 0), (1, -1, 1))


def test_shape_regularity_kuhn():
    npt.assert_allclose(shape_regularity(unit_cube_mesh()), KUHN_ALPHA,
                        rtol=1e-12)


def test_shape_regularity_h_independent():
    a2 = shape_regularity(build_uniform_mesh(BoxDomain((0, 0, 0), (1, 1, 1)), 0.5))
    a4 = shape_regularity(build_uniform_mesh(BoxDomain((0, 0, 0), (1, 1, 1)), 0.25))
    npt.assert_allclose(a2, KUHN_ALPHA, rtol=1e-12)
    npt.assert_allclose(a4, KUHN_ALPHA, rtol=1e-12)


def test_shape_regularity_translation_invariant():
    mesh = build_uniform_mesh(BoxDomain((5, -3, 11), (6, -2, 12)), 1.0)
    npt.assert_allclose(shape_regularity(mesh), KUHN_ALPHA, rtol=1e-12)


def test_shape_regularity_regular_tet():
    # Circumscribed/inscribed ball diameter ratio of a regular tet is 3.
    npt.assert_allclose(shape_regularity(regular_tet_mesh()), 3.0, rtol=1e-12)


def test_shape_regularity_per_tet(mesh_h4):
    per = shape_regularity(mesh_h4, per_tet=True)
    assert per.shape == (mesh_h4.n_tets,)
    npt.assert_allclose(per, KUHN_ALPHA, rtol=1e-12)


def test_degenerate_tet_reported():
    nodes = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]], dtype=float)
    mesh = TetMesh(nodes, np.array([[0, 1, 2, 3]]), h=1.0,
                   box=BoxDomain((0, 0, 0), (1, 1, 1)))
    with pytest.raises(ValueError, match="degenerate tetrahedron at index 0"):
        shape_regularity(mesh)


def test_min_angle_kuhn():
    npt.assert_allclose(min_angle_theta(unit_cube_mesh()), KUHN_MIN_ANGLE,
                        rtol=1e-12)


def test_min_face_angle_kuhn():
    face = tet_face_angles(unit_cube_mesh())
    npt.assert_allclose(face.min(), KUHN_MIN_FACE_ANGLE, rtol=1e-12)


def test_angle_shapes(mesh_h2):
    assert tet_face_angles(mesh_h2).shape == (mesh_h2.n_tets, 12)
    assert tet_edge_face_angles(mesh_h2).shape == (mesh_h2.n_tets, 12)


def test_min_angle_regular_tet():
    mesh = regular_tet_mesh()
    npt.assert_allclose(min_angle_theta(mesh), REGULAR_MIN_ANGLE, rtol=1e-12)
    npt.assert_allclose(tet_face_angles(mesh), np.pi / 3.0, rtol=1e-12)


def test_face_angle_sums(mesh_h2):
    # The three angles of every tet face sum to pi.
    ang = tet_face_angles(mesh_h2).reshape(mesh_h2.n_tets, 4, 3)
    npt.assert_allclose(ang.sum(axis=2), np.pi, rtol=1e-12)


def test_lexicographic_node_order():
    mesh = unit_cube_mesh()
    # x varies fastest: node 1 is (1,0,0), node 2 is (0,1,0), node 4 is (0,0,1).
    npt.assert_array_equal(mesh.nodes[1], [1, 0, 0])
    npt.assert_array_equal(mesh.nodes[2], [0, 1, 0])
    npt.assert_array_equal(mesh.nodes[4], [0, 0, 1])


def test_main_diagonal_shared():
    # All 6 tets of the Kuhn split contain the cube diagonal 0 -> 7.
    mesh = unit_cube_mesh()
    for tet in mesh.tets:
        assert 0 in tet and 7 in tet
