import math

import numpy as np
import pytest

from moldgate.errors import MeshValidationError
from moldgate.mass import facet_area, facet_centroid, facet_properties, mesh_center_of_mass
from moldgate.mesh import TriangleMesh, bounding_box

from shapes import box_triangles, open_box, random_soup, rotation, unit_cube


def _close(a, b, rel=1e-9):
    scale = max(np.linalg.norm(a), np.linalg.norm(b), 1.0)
    return np.linalg.norm(np.subtract(a, b)) <= rel * scale


def test_facet_area_examples():
    assert facet_area((0, 0, 0), (3, 0, 0), (0, 4, 0)) == pytest.approx(6.0)
    assert facet_area((0, 0, 0), (1, 1, 1), (2, 2, 2)) == 0.0
    assert facet_area((0, 0, 0), (1, 0, 0), (0, 1, 0)) == pytest.approx(0.5)


def test_facet_centroid_examples():
    assert facet_centroid((0, 0, 0), (1, 0, 0), (0, 1, 0)) == pytest.approx((1 / 3, 1 / 3, 0))

    h = math.sqrt(3) / 2
    equilateral = [(-0.5, -h / 3, 0), (0.5, -h / 3, 0), (0, 2 * h / 3, 0)]
    assert np.allclose(facet_centroid(*equilateral), (0, 0, 0), atol=1e-15)

    moved = [np.add(v, (4, 5, 6)) for v in equilateral]
    assert np.allclose(facet_centroid(*moved), (4, 5, 6))


def test_facet_properties_matches_scalar_forms():
    mesh = random_soup(count=25, seed=2)
    props = facet_properties(mesh)
    for f, corners in enumerate(mesh.triangles):
        assert props.areas[f] == pytest.approx(facet_area(*corners))
        assert np.allclose(props.centroids[f], facet_centroid(*corners))


def test_unit_cube_center_of_mass():
    com = mesh_center_of_mass(unit_cube())
    assert _close(com.point, (0.5, 0.5, 0.5))
    assert com.total_area == pytest.approx(6.0)


def test_open_box_center_of_mass():
    mesh = open_box()
    assert mesh.facet_count == 10
    assert _close(mesh_center_of_mass(mesh).point, (0.5, 0.5, 0.4))


def test_center_of_mass_is_translation_equivariant():
    mesh = random_soup(count=200, seed=5)
    offset = np.array([120.0, -40.0, 7.5])
    before = mesh_center_of_mass(mesh).point
    after = mesh_center_of_mass(mesh.translated(offset)).point
    assert _close(after, np.add(before, offset))


def test_center_of_mass_is_rotation_equivariant():
    mesh = random_soup(count=200, seed=6)
    R = rotation((1, 2, 3), 0.7)
    before = np.asarray(mesh_center_of_mass(mesh).point)
    after = mesh_center_of_mass(mesh.transformed(R)).point
    assert _close(after, R @ before)


def test_center_of_mass_scales_with_the_mesh():
    mesh = random_soup(count=100, seed=8)
    before = np.asarray(mesh_center_of_mass(mesh).point)
    scaled = TriangleMesh(mesh.vertices * 2.5, mesh.facets)
    assert _close(mesh_center_of_mass(scaled).point, before * 2.5)


def test_facet_order_does_not_matter():
    mesh = random_soup(count=500, seed=9)
    order = np.random.default_rng(1).permutation(mesh.facet_count)
    shuffled = TriangleMesh(mesh.vertices, mesh.facets[order])
    assert _close(mesh_center_of_mass(shuffled).point, mesh_center_of_mass(mesh).point)


def test_zero_area_facets_carry_no_weight():
    triangles = box_triangles((0, 0, 0), (1, 1, 1))
    triangles.append(((5, 5, 5), (6, 6, 6), (7, 7, 7)))
    with_sliver = TriangleMesh.from_triangles(np.array(triangles))
    assert _close(mesh_center_of_mass(with_sliver).point, mesh_center_of_mass(unit_cube()).point)


def test_center_of_mass_lies_in_bounding_box():
    for seed in range(5):
        mesh = random_soup(count=50, seed=seed)
        assert bounding_box(mesh).contains(mesh_center_of_mass(mesh).point, tol=1e-9)


def test_zero_total_area_is_rejected():
    mesh = TriangleMesh.from_triangles(np.array([((0, 0, 0), (1, 1, 1), (2, 2, 2))]))
    with pytest.raises(MeshValidationError, match="zero total area"):
        mesh_center_of_mass(mesh)


def _surface_samples(mesh, count, rng):
    """Uniform points on the surface: area-weighted facet, uniform inside it."""
    areas = facet_properties(mesh).areas
    facets = rng.choice(mesh.facet_count, size=count, p=areas / areas.sum())
    r1, r2 = rng.random(count), rng.random(count)
    flip = r1 + r2 > 1
    r1[flip], r2[flip] = 1 - r1[flip], 1 - r2[flip]
    corners = mesh.triangles[facets]
    return (
        corners[:, 0]
        + r1[:, None] * (corners[:, 1] - corners[:, 0])
        + r2[:, None] * (corners[:, 2] - corners[:, 0])
    )


def test_center_of_mass_matches_monte_carlo_sampling():
    rng = np.random.default_rng(2024)
    for seed in range(20):
        mesh = random_soup(count=500, seed=100 + seed)
        samples = _surface_samples(mesh, 200_000, rng)

        estimate = samples.mean(axis=0)
        stderr = samples.std(axis=0, ddof=1) / math.sqrt(len(samples))
        z = (np.asarray(mesh_center_of_mass(mesh).point) - estimate) / stderr

        # within 3 standard errors, root mean square over the three axes
        assert np.sqrt(np.mean(z**2)) <= 3.0, (seed, z)
