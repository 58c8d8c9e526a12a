"""Runtime envelope on a ~100k facet part. Run with ``pytest -m slow``."""

import time

import numpy as np
import pytest

from moldgate.gateplan import PlanConfig, plan_gate
from moldgate.materials import MaterialDatabase
from moldgate.spatial import BruteForce, build_accel

from shapes import heightfield

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def dense_sheet():
    # 2 * 223**2 = 99458 facets
    return heightfield(n=224, size=200.0, seed=7)


def test_plan_gate_envelope(dense_sheet):
    material = MaterialDatabase.load(environ={}).get("PP")
    config = PlanConfig(part_thickness=8.0, grid_spacing=2.0)

    started = time.perf_counter()
    plan = plan_gate(dense_sheet, material, config)
    elapsed = time.perf_counter() - started

    assert plan.total_nodes == 101 * 101
    assert plan.feasible
    assert elapsed < 15.0


def test_bvh_beats_brute_force(dense_sheet):
    rng = np.random.default_rng(0)
    origins = np.column_stack(
        (rng.uniform(0, 200, 200), rng.uniform(0, 200, 200), np.full(200, 20.0))
    )
    directions = np.tile((0.0, 0.0, -1.0), (200, 1))
    accel = build_accel(dense_sheet)
    brute = BruteForce(dense_sheet)

    started = time.perf_counter()
    fast = accel.cast(origins, directions)
    accel_time = time.perf_counter() - started

    started = time.perf_counter()
    slow = brute.cast(origins, directions)
    brute_time = time.perf_counter() - started

    assert np.array_equal(fast[0], slow[0])
    assert accel_time < brute_time
