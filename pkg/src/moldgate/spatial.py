"""Ray casting against the part mesh.

A bounding-volume hierarchy over facets answers nearest-hit queries for
whole batches of rays at once: traversal keeps, per node, the subset of
rays whose slab test passes and intersects leaf facets with a vectorised
Moller-Trumbore kernel. The brute-force intersector uses the same kernel
over every facet and serves as the oracle.

Nearest hits are ordered by (t rounded to 1e-9 mm, facet index), so a
ray through an edge shared by two facets always reports the same facet.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator, List, Optional, Protocol, Sequence, Tuple

import numpy as np

from .constants import (
    BARYCENTRIC_EPS,
    BVH_LEAF_SIZE,
    HIT_DEDUP_DECIMALS,
    PARALLEL_EPS,
    UNIT_TOLERANCE,
)
from .mesh import TriangleMesh, facet_cross

logger = logging.getLogger(__name__)

Point = Tuple[float, float, float]

NO_FACET = np.iinfo(np.int64).max

# Rays tested against the full facet list per chunk in the brute-force path
BRUTE_FORCE_CHUNK = 64


@dataclass(frozen=True)
class Ray:
    origin: Point
    direction: Point

    def __post_init__(self):
        norm = float(np.linalg.norm(self.direction))
        if abs(norm - 1.0) > UNIT_TOLERANCE:
            raise ValueError(f"Ray direction must be a unit vector (norm {norm})")

    @classmethod
    def towards(cls, origin: Sequence[float], direction: Sequence[float]) -> "Ray":
        d = np.asarray(direction, dtype=np.float64)
        norm = np.linalg.norm(d)
        if norm == 0:
            raise ValueError("Ray direction must be non-zero")
        d = d / norm
        return cls(
            tuple(float(x) for x in origin),  # type: ignore[arg-type]
            (float(d[0]), float(d[1]), float(d[2])),
        )


@dataclass(frozen=True)
class Hit:
    facet: int
    t: float
    point: Point
    # sign of (facet normal . ray direction); -1 means the facet faces the ray
    alignment: int


def _dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 0] + a[..., 1] * b[..., 1] + a[..., 2] * b[..., 2]


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.stack(
        (
            a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1],
            a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2],
            a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0],
        ),
        axis=-1,
    )


@dataclass(frozen=True, eq=False)
class FacetData:
    """Per-facet arrays the kernel needs, with geometry-derived normals."""

    v0: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    normals: np.ndarray

    @classmethod
    def from_mesh(cls, mesh: TriangleMesh) -> "FacetData":
        triangles = mesh.triangles
        cross = facet_cross(mesh.vertices, mesh.facets)
        norms = np.linalg.norm(cross, axis=1)
        normals = np.zeros_like(cross)
        nonzero = norms > 0
        normals[nonzero] = cross[nonzero] / norms[nonzero, None]
        data = cls(
            v0=triangles[:, 0].copy(),
            e1=triangles[:, 1] - triangles[:, 0],
            e2=triangles[:, 2] - triangles[:, 0],
            normals=normals,
        )
        for array in (data.v0, data.e1, data.e2, data.normals):
            array.setflags(write=False)
        return data


def intersect(
    origins: np.ndarray,
    directions: np.ndarray,
    facets: FacetData,
    ids: np.ndarray,
) -> np.ndarray:
    """Ray parameter for every (ray, facet) pair, inf on miss.

    ``origins``/``directions`` are (R, 3); ``ids`` selects K facets.
    Returns an (R, K) array. Facets within PARALLEL_EPS of parallel to the
    ray never hit; barycentric bounds are inclusive with a small slack.
    """
    o = origins[:, None, :]
    d = directions[:, None, :]
    v0 = facets.v0[ids][None, :, :]
    e1 = facets.e1[ids][None, :, :]
    e2 = facets.e2[ids][None, :, :]
    n = facets.normals[ids][None, :, :]

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        pvec = _cross(d, e2)
        det = _dot(e1, pvec)
        inv_det = 1.0 / det
        tvec = o - v0
        u = _dot(tvec, pvec) * inv_det
        qvec = _cross(tvec, e1)
        v = _dot(d, qvec) * inv_det
        t = _dot(e2, qvec) * inv_det

        hit = (
            (np.abs(_dot(n, d)) >= PARALLEL_EPS)
            & (det != 0)
            & (u >= -BARYCENTRIC_EPS)
            & (v >= -BARYCENTRIC_EPS)
            & (u + v <= 1.0 + BARYCENTRIC_EPS)
            & (t >= 0)
        )
    return np.where(hit, t, np.inf)


def _nearest(t: np.ndarray, ids: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per row: (rounded t, facet id, t) of the nearest hit under the tie rule."""
    rounded = np.round(t, HIT_DEDUP_DECIMALS)
    best_q = rounded.min(axis=1)
    tied = np.where(rounded == best_q[:, None], ids[None, :], NO_FACET)
    column = np.argmin(tied, axis=1)
    rows = np.arange(len(t))
    best_f = tied[rows, column]
    best_t = t[rows, column]
    missed = ~np.isfinite(best_q)
    best_f[missed] = NO_FACET
    best_t[missed] = np.inf
    return best_q, best_f, best_t


def _as_ray_arrays(
    origins: Sequence, directions: Sequence
) -> Tuple[np.ndarray, np.ndarray]:
    o = np.ascontiguousarray(origins, dtype=np.float64).reshape(-1, 3)
    d = np.ascontiguousarray(directions, dtype=np.float64).reshape(-1, 3)
    if len(d) == 1 and len(o) > 1:
        d = np.repeat(d, len(o), axis=0)
    if o.shape != d.shape:
        raise ValueError("One direction per origin (or a single shared one) is required")
    return o, d


class Intersector(Protocol):
    facets: FacetData

    def cast(
        self, origins: np.ndarray, directions: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Nearest (facet, t) per ray; facet -1 and t inf on miss."""
        ...


def _alignment(facets: FacetData, facet: int, direction: np.ndarray) -> int:
    return 1 if float(np.dot(facets.normals[facet], direction)) > 0 else -1


def to_hits(
    intersector: Intersector,
    origins: np.ndarray,
    directions: np.ndarray,
    facet_ids: np.ndarray,
    ts: np.ndarray,
) -> List[Optional[Hit]]:
    """Cast results as Hit records; None where facet id < 0."""
    hits: List[Optional[Hit]] = []
    for o, d, f, t in zip(origins, directions, facet_ids, ts):
        if f < 0:
            hits.append(None)
            continue
        p = o + t * d
        hits.append(
            Hit(
                facet=int(f),
                t=float(t),
                point=(float(p[0]), float(p[1]), float(p[2])),
                alignment=_alignment(intersector.facets, int(f), d),
            )
        )
    return hits


@dataclass(frozen=True, eq=False)
class Bvh:
    """Flattened BVH; node 0 is the root.

    Inner nodes have ``left``/``right`` child indices; leaves have
    ``left == -1`` and own ``order[start:start + count]``.
    """

    mesh: TriangleMesh
    facets: FacetData
    lo: np.ndarray
    hi: np.ndarray
    left: np.ndarray
    right: np.ndarray
    start: np.ndarray
    count: np.ndarray
    order: np.ndarray
    pad: float

    @property
    def node_count(self) -> int:
        return len(self.lo)

    @property
    def root_box(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.lo[0], self.hi[0]

    def is_leaf(self, node: int) -> bool:
        return bool(self.left[node] < 0)

    def leaves(self) -> Iterator[Tuple[int, np.ndarray]]:
        for node in range(self.node_count):
            if self.is_leaf(node):
                s = self.start[node]
                yield node, self.order[s : s + self.count[node]]

    def _slab(
        self,
        node: int,
        o: np.ndarray,
        d: np.ndarray,
        limit: np.ndarray,
    ) -> np.ndarray:
        lo = self.lo[node] - self.pad
        hi = self.hi[node] + self.pad
        zero = d == 0
        with np.errstate(divide="ignore"):
            inv = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, d))
        t0 = (lo - o) * inv
        t1 = (hi - o) * inv
        inside = (o >= lo) & (o <= hi)
        tmin = np.where(zero, np.where(inside, -np.inf, np.inf), np.minimum(t0, t1))
        tmax = np.where(zero, np.where(inside, np.inf, -np.inf), np.maximum(t0, t1))
        near = np.maximum(tmin.max(axis=1), 0.0)
        far = tmax.min(axis=1)
        return (near <= far) & (near <= limit)

    def cast(
        self, origins: np.ndarray, directions: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        o, d = _as_ray_arrays(origins, directions)
        best_q = np.full(len(o), np.inf)
        best_f = np.full(len(o), NO_FACET, dtype=np.int64)
        best_t = np.full(len(o), np.inf)
        # a node whose entry point is beyond best t by more than this
        # cannot hold a winner, even after rounding
        margin = 10.0 ** (-HIT_DEDUP_DECIMALS + 3)

        stack = [(0, np.arange(len(o)))]
        while stack:
            node, rays = stack.pop()
            keep = self._slab(node, o[rays], d[rays], best_t[rays] + margin)
            rays = rays[keep]
            if not len(rays):
                continue

            if self.left[node] >= 0:
                stack.append((int(self.right[node]), rays))
                stack.append((int(self.left[node]), rays))
                continue

            s = self.start[node]
            ids = self.order[s : s + self.count[node]]
            q, f, t = _nearest(intersect(o[rays], d[rays], self.facets, ids), ids)
            better = (q < best_q[rays]) | ((q == best_q[rays]) & (f < best_f[rays]))
            better &= np.isfinite(q)
            winners = rays[better]
            best_q[winners] = q[better]
            best_f[winners] = f[better]
            best_t[winners] = t[better]

        best_f[best_f == NO_FACET] = -1
        return best_f, best_t


def build_accel(mesh: TriangleMesh, leaf_size: int = BVH_LEAF_SIZE) -> Bvh:
    """Median split on the longest centroid axis, stable sort, fixed order."""
    triangles = mesh.triangles
    f_lo = triangles.min(axis=1)
    f_hi = triangles.max(axis=1)
    centroids = triangles.mean(axis=1)
    order = np.arange(mesh.facet_count, dtype=np.int64)

    lo: List[np.ndarray] = [f_lo.min(axis=0)]
    hi: List[np.ndarray] = [f_hi.max(axis=0)]
    left = [-1]
    right = [-1]
    start = [0]
    count = [mesh.facet_count]

    stack = [0]
    while stack:
        node = stack.pop()
        s, n = start[node], count[node]
        if n <= leaf_size:
            continue

        idx = order[s : s + n]
        c = centroids[idx]
        axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
        idx = idx[np.argsort(c[:, axis], kind="stable")]
        order[s : s + n] = idx
        half = n // 2

        for child_start, child in ((s, idx[:half]), (s + half, idx[half:])):
            lo.append(f_lo[child].min(axis=0))
            hi.append(f_hi[child].max(axis=0))
            left.append(-1)
            right.append(-1)
            start.append(child_start)
            count.append(len(child))
        left[node] = len(lo) - 2
        right[node] = len(lo) - 1
        stack.extend((right[node], left[node]))

    diag = float(np.linalg.norm(hi[0] - lo[0]))
    bvh = Bvh(
        mesh=mesh,
        facets=FacetData.from_mesh(mesh),
        lo=np.asarray(lo),
        hi=np.asarray(hi),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        start=np.asarray(start, dtype=np.int64),
        count=np.asarray(count, dtype=np.int64),
        order=order,
        pad=1e-9 * max(diag, 1.0),
    )
    for array in (bvh.lo, bvh.hi, bvh.left, bvh.right, bvh.start, bvh.count, bvh.order):
        array.setflags(write=False)
    logger.debug("BVH: %d facets, %d nodes", mesh.facet_count, bvh.node_count)
    return bvh


def ray_nearest_hit(accel: Bvh, ray: Ray) -> Optional[Hit]:
    """First hit along a single ray, or None."""
    o = np.asarray([ray.origin], dtype=np.float64)
    d = np.asarray([ray.direction], dtype=np.float64)
    facet_ids, ts = accel.cast(o, d)
    return to_hits(accel, o, d, facet_ids, ts)[0]


class BruteForce:
    """Tests every ray against every facet; the reference intersector."""

    def __init__(self, mesh: TriangleMesh):
        self.mesh = mesh
        self.facets = FacetData.from_mesh(mesh)
        self.ids = np.arange(mesh.facet_count, dtype=np.int64)

    def cast(
        self, origins: np.ndarray, directions: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        o, d = _as_ray_arrays(origins, directions)
        best_f = np.empty(len(o), dtype=np.int64)
        best_t = np.empty(len(o))
        for s in range(0, len(o), BRUTE_FORCE_CHUNK):
            e = s + BRUTE_FORCE_CHUNK
            _, f, t = _nearest(intersect(o[s:e], d[s:e], self.facets, self.ids), self.ids)
            best_f[s:e] = f
            best_t[s:e] = t
        best_f[best_f == NO_FACET] = -1
        return best_f, best_t


def ray_all_hits_bruteforce(mesh: TriangleMesh, ray: Ray) -> List[Hit]:
    """Every intersection sorted by t, one hit per t (within 1e-9 mm)."""
    oracle = BruteForce(mesh)
    o = np.asarray([ray.origin], dtype=np.float64)
    d = np.asarray([ray.direction], dtype=np.float64)
    t = intersect(o, d, oracle.facets, oracle.ids)[0]

    rounded = np.round(t, HIT_DEDUP_DECIMALS)
    hit_ids = np.flatnonzero(np.isfinite(t))
    hit_ids = hit_ids[np.lexsort((hit_ids, rounded[hit_ids]))]

    hits: List[Hit] = []
    seen = set()
    for facet in hit_ids:
        key = float(rounded[facet])
        if key in seen:
            continue
        seen.add(key)
        p = o[0] + t[facet] * d[0]
        hits.append(
            Hit(
                facet=int(facet),
                t=float(t[facet]),
                point=(float(p[0]), float(p[1]), float(p[2])),
                alignment=_alignment(oracle.facets, int(facet), d[0]),
            )
        )
    return hits
