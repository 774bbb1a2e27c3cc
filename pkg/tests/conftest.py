import numpy as np
import pytest

from levelsurf import (
    BoxDomain,
    SphereLevelSet,
    build_uniform_mesh,
    extract_surface,
    interpolate_nodal,
    snap_small_values,
)

BOX = BoxDomain((-2.0, -2.0, -2.0), (2.0, 2.0, 2.0))


def sphere_surface(h, zc=0.0, radius=1.0, box=BOX):
    """(spec, surface) for the standard sphere setup at mesh size h."""
    mesh = build_uniform_mesh(box, h)
    spec = SphereLevelSet(center=(0.0, 0.0, zc), radius=radius)
    field = snap_small_values(interpolate_nodal(spec, mesh))
    return spec, extract_surface(mesh, field)


def random_triangles(rng, n, scale=1.0, min_area=1e-6):
    """(n, 3, 3) random non-degenerate triangle vertex coordinates."""
    tris = []
    while len(tris) < n:
        p = rng.standard_normal((3, 3)) * scale
        if 0.5 * np.linalg.norm(np.cross(p[1] - p[0], p[2] - p[0])) > min_area:
            tris.append(p)
    return np.array(tris)


@pytest.fixture(scope="session")
def mesh_h2():
    return build_uniform_mesh(BOX, 0.5)


@pytest.fixture(scope="session")
def mesh_h4():
    return build_uniform_mesh(BOX, 0.25)


@pytest.fixture(scope="session")
def sphere_h4():
    return sphere_surface(0.25)


@pytest.fixture(scope="session")
def sphere_h4_shifted():
    return sphere_surface(0.25, zc=0.03)


@pytest.fixture(scope="session")
def sphere_h8():
    return sphere_surface(0.125)


@pytest.fixture(scope="session")
def sphere_h8_shifted():
    return sphere_surface(0.125, zc=0.03)
