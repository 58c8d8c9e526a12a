from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from moldgate.mesh import TriangleMesh, bounding_box
from moldgate.spatial import (
    BruteForce,
    Ray,
    build_accel,
    ray_all_hits_bruteforce,
    ray_nearest_hit,
)

from shapes import plate_with_hole, random_soup, rotation, sphere, unit_cube

TRIANGLE = TriangleMesh.from_triangles(np.array([((0, 0, 0), (1, 0, 0), (0, 1, 0))]))


def test_root_box_is_mesh_bounding_box():
    accel = build_accel(unit_cube())
    lo, hi = accel.root_box
    box = bounding_box(unit_cube())
    assert tuple(lo) == box.min
    assert tuple(hi) == box.max


def test_single_facet_is_one_leaf():
    accel = build_accel(TRIANGLE)
    assert accel.node_count == 1
    assert accel.is_leaf(0)


def test_every_facet_lands_in_exactly_one_leaf():
    mesh = random_soup(count=300, seed=1)
    accel = build_accel(mesh, leaf_size=8)
    seen = np.concatenate([ids for _, ids in accel.leaves()])
    assert sorted(seen.tolist()) == list(range(mesh.facet_count))
    assert all(len(ids) <= 8 for _, ids in accel.leaves())


def test_nearest_hit_axis_aligned():
    accel = build_accel(TRIANGLE)
    hit = ray_nearest_hit(accel, Ray((0.2, 0.3, 5.0), (0.0, 0.0, -1.0)))
    assert hit is not None
    assert hit.facet == 0
    assert hit.t == pytest.approx(5.0)
    assert hit.point == pytest.approx((0.2, 0.3, 0.0))
    assert hit.alignment == -1

    assert ray_nearest_hit(accel, Ray((2.0, 2.0, 5.0), (0.0, 0.0, -1.0))) is None


def test_ray_requires_unit_direction():
    with pytest.raises(ValueError):
        Ray((0, 0, 0), (0, 0, 2))
    assert Ray.towards((0, 0, 0), (0, 0, 2)).direction == (0.0, 0.0, 1.0)


def test_parallel_ray_misses():
    accel = build_accel(TRIANGLE)
    assert ray_nearest_hit(accel, Ray((-1.0, 0.2, 0.0), (1.0, 0.0, 0.0))) is None


def test_vertical_ray_through_cube_hits_twice():
    hits = ray_all_hits_bruteforce(unit_cube(), Ray((0.3, 0.6, 5.0), (0.0, 0.0, -1.0)))
    assert [round(h.t, 9) for h in hits] == [4.0, 5.0]
    assert hits[0].alignment == -1
    assert hits[1].alignment == 1


def test_shared_edge_is_reported_once():
    # (0.5, 0.5) lies on the top diagonal shared by two facets
    hits = ray_all_hits_bruteforce(unit_cube(), Ray((0.5, 0.5, 3.0), (0.0, 0.0, -1.0)))
    assert len(hits) == 2
    brute = BruteForce(unit_cube())
    t = [h.t for h in hits]
    assert len(set(np.round(t, 9))) == len(t)
    facet, _ = brute.cast(np.array([[0.5, 0.5, 3.0]]), np.array([[0.0, 0.0, -1.0]]))
    assert facet[0] == hits[0].facet


def test_miss_gives_empty_list():
    assert ray_all_hits_bruteforce(unit_cube(), Ray((5, 5, 5), (0, 0, -1))) == []


def _random_rays(mesh, count, rng):
    box = bounding_box(mesh)
    lo, hi = np.asarray(box.min), np.asarray(box.max)
    center = (lo + hi) / 2
    radius = np.linalg.norm(hi - lo)
    origins = center + rng.normal(size=(count, 3)) * radius
    targets = rng.uniform(lo, hi, size=(count, 3))
    directions = targets - origins
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    return origins, directions


def test_bvh_matches_brute_force_on_random_rays():
    rng = np.random.default_rng(42)
    mesh = random_soup(count=2000, seed=3, extent=50.0)
    accel = build_accel(mesh)
    brute = BruteForce(mesh)
    origins, directions = _random_rays(mesh, 1000, rng)

    facets, ts = accel.cast(origins, directions)
    oracle_facets, oracle_ts = brute.cast(origins, directions)

    assert np.array_equal(facets, oracle_facets)
    hit = facets >= 0
    assert np.allclose(ts[hit], oracle_ts[hit], atol=1e-9)
    assert hit.sum() > 100


def test_bvh_matches_sorted_brute_force_list():
    rng = np.random.default_rng(5)
    for mesh in (sphere(), plate_with_hole(), random_soup(count=500, seed=12)):
        accel = build_accel(mesh)
        origins, directions = _random_rays(mesh, 60, rng)
        for o, d in zip(origins, directions):
            ray = Ray(tuple(o), tuple(d))
            hits = ray_all_hits_bruteforce(mesh, ray)
            nearest = ray_nearest_hit(accel, ray)
            if not hits:
                assert nearest is None
            else:
                assert nearest is not None
                assert nearest.facet == hits[0].facet
                assert nearest.t == pytest.approx(hits[0].t, abs=1e-9)


def test_hits_transform_with_rigid_motion():
    mesh = sphere(radius=10.0)
    R = rotation((0.3, -1.0, 0.5), 1.1)
    offset = np.array([5.0, -2.0, 8.0])
    moved = build_accel(mesh.transformed(R, offset))
    accel = build_accel(mesh)

    ray = Ray((0.5, 1.0, 40.0), (0.0, 0.0, -1.0))
    hit = ray_nearest_hit(accel, ray)
    moved_dir = R @ np.array(ray.direction)
    moved_origin = R @ np.array(ray.origin) + offset
    moved_ray = Ray(tuple(moved_origin), tuple(moved_dir / np.linalg.norm(moved_dir)))
    moved_hit = ray_nearest_hit(moved, moved_ray)

    assert moved_hit is not None
    assert np.allclose(moved_hit.point, R @ np.array(hit.point) + offset, atol=1e-9)


def test_concurrent_queries_match_serial():
    rng = np.random.default_rng(9)
    mesh = random_soup(count=800, seed=4)
    accel = build_accel(mesh)
    origins, directions = _random_rays(mesh, 400, rng)
    serial = accel.cast(origins, directions)

    chunks = [(origins[s : s + 50], directions[s : s + 50]) for s in range(0, 400, 50)]
    with ThreadPoolExecutor(max_workers=4) as pool:
        parts = list(pool.map(lambda c: accel.cast(*c), chunks))

    assert np.array_equal(np.concatenate([p[0] for p in parts]), serial[0])
    assert np.array_equal(np.concatenate([p[1] for p in parts]), serial[1])
