"""Discrete part geometry: triangle soup, bounding box, validation, welding."""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, Sequence, Tuple

import numpy as np

from .constants import WELD_TOLERANCE
from .errors import MeshValidationError

logger = logging.getLogger(__name__)

Point = Tuple[float, float, float]
Edge = Tuple[int, int]

# Facets whose doubled area is below this fraction of their longest edge
# squared are degenerate
DEGENERATE_RTOL = 1e-12


def facet_cross(vertices: np.ndarray, facets: np.ndarray) -> np.ndarray:
    """Cross product (V2 - V1) x (V3 - V1) for every facet, shape (F, 3)."""
    v1 = vertices[facets[:, 0]]
    return np.cross(vertices[facets[:, 1]] - v1, vertices[facets[:, 2]] - v1)


def _unit_rows(rows: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(rows, axis=1)
    out = np.zeros_like(rows)
    nonzero = norms > 0
    out[nonzero] = rows[nonzero] / norms[nonzero, None]
    return out


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """Vertex array plus vertex-index triples, lengths in millimetres.

    ``normals`` holds one unit normal per facet (zero for degenerate
    facets). Arrays are made read-only so a mesh can be shared freely.
    """

    vertices: np.ndarray
    facets: np.ndarray
    normals: np.ndarray = field(default=None)  # type: ignore[assignment]
    source_unit: str = "mm"

    def __post_init__(self):
        vertices = np.array(self.vertices, dtype=np.float64).reshape(-1, 3)
        facets = np.array(self.facets, dtype=np.int64).reshape(-1, 3)

        if len(facets) == 0:
            raise MeshValidationError("Mesh has no facets")
        if not np.all(np.isfinite(vertices)):
            raise MeshValidationError("Mesh has NaN or infinite coordinates")
        if facets.min() < 0 or facets.max() >= len(vertices):
            raise MeshValidationError("Facet references a missing vertex")

        if self.normals is None:
            normals = _unit_rows(facet_cross(vertices, facets))
        else:
            normals = np.array(self.normals, dtype=np.float64).reshape(-1, 3)
            if normals.shape != facets.shape:
                raise MeshValidationError("One normal per facet is required")

        for array in (vertices, facets, normals):
            array.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "facets", facets)
        object.__setattr__(self, "normals", normals)

    @classmethod
    def from_triangles(cls, triangles: np.ndarray) -> "TriangleMesh":
        """Build a soup mesh from an (F, 3, 3) array of facet corners."""
        triangles = np.asarray(triangles, dtype=np.float64).reshape(-1, 3, 3)
        facets = np.arange(len(triangles) * 3).reshape(-1, 3)
        return cls(triangles.reshape(-1, 3), facets)

    @property
    def facet_count(self) -> int:
        return len(self.facets)

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def triangles(self) -> np.ndarray:
        """Facet corners, shape (F, 3, 3)."""
        return self.vertices[self.facets]

    def translated(self, offset: Sequence[float]) -> "TriangleMesh":
        return TriangleMesh(
            self.vertices + np.asarray(offset, dtype=np.float64),
            self.facets,
            self.normals,
        )

    def transformed(
        self, rotation: np.ndarray, offset: Sequence[float] = (0.0, 0.0, 0.0)
    ) -> "TriangleMesh":
        """Apply ``x -> R x + t``; normals are rotated with the geometry."""
        rotation = np.asarray(rotation, dtype=np.float64)
        return TriangleMesh(
            self.vertices @ rotation.T + np.asarray(offset, dtype=np.float64),
            self.facets,
            self.normals @ rotation.T,
        )


@dataclass(frozen=True)
class Aabb:
    min: Point
    max: Point

    def __post_init__(self):
        if any(lo > hi for lo, hi in zip(self.min, self.max)):
            raise ValueError(f"Invalid box: min {self.min} > max {self.max}")

    @property
    def extent(self) -> np.ndarray:
        return np.asarray(self.max) - np.asarray(self.min)

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.extent))

    def corners(self) -> np.ndarray:
        """The 8 box corners, shape (8, 3)."""
        return np.array(
            list(itertools.product(*zip(self.min, self.max))), dtype=np.float64
        )

    def contains(self, point: Sequence[float], tol: float = 0.0) -> bool:
        p = np.asarray(point, dtype=np.float64)
        return bool(
            np.all(p >= np.asarray(self.min) - tol)
            and np.all(p <= np.asarray(self.max) + tol)
        )


def bounding_box(mesh: TriangleMesh) -> Aabb:
    """Componentwise min/max over all vertices."""
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    return Aabb(
        tuple(float(x) for x in lo),  # type: ignore[arg-type]
        tuple(float(x) for x in hi),  # type: ignore[arg-type]
    )


@dataclass(frozen=True)
class ValidationReport:
    facet_count: int
    vertex_count: int
    degenerate_facets: Tuple[int, ...]
    duplicate_facets: int
    non_finite: int
    total_area: float

    @property
    def valid(self) -> bool:
        return (
            self.non_finite == 0
            and len(self.degenerate_facets) < self.facet_count
        )


def validate_mesh(mesh: TriangleMesh) -> ValidationReport:
    """Count degenerate, duplicate and non-finite facets.

    Degenerate facets are flagged but kept so facet indices stay stable;
    they carry zero weight in the centre of mass. Raises
    MeshValidationError only when no facet has usable area.
    """
    triangles = mesh.triangles
    non_finite = int(np.count_nonzero(~np.isfinite(triangles).all(axis=(1, 2))))

    cross = np.linalg.norm(facet_cross(mesh.vertices, mesh.facets), axis=1)
    edges = triangles - np.roll(triangles, 1, axis=1)
    longest = np.max(np.einsum("fij,fij->fi", edges, edges), axis=1)
    degenerate = np.flatnonzero(cross <= DEGENERATE_RTOL * longest)

    _, position_ids = np.unique(mesh.vertices, axis=0, return_inverse=True)
    keyed = np.sort(position_ids.reshape(-1)[mesh.facets], axis=1)
    duplicates = len(keyed) - len(np.unique(keyed, axis=0))

    report = ValidationReport(
        facet_count=mesh.facet_count,
        vertex_count=mesh.vertex_count,
        degenerate_facets=tuple(int(i) for i in degenerate),
        duplicate_facets=int(duplicates),
        non_finite=non_finite,
        total_area=float(0.5 * cross.sum()),
    )

    if len(degenerate) == mesh.facet_count:
        raise MeshValidationError(
            "Mesh has no usable area: every facet is degenerate"
        )
    if len(degenerate):
        logger.warning("%d degenerate facet(s) kept with zero weight", len(degenerate))
    if duplicates:
        logger.warning("%d duplicate facet(s)", duplicates)
    return report


@dataclass(frozen=True, eq=False)
class WeldedMesh:
    """Deduplicated vertices, re-indexed facets and edge -> facets map.

    Edge keys are sorted vertex pairs; each value lists the facets using
    the edge in facet order. Manifoldness is not required.
    """

    vertices: np.ndarray
    facets: np.ndarray
    edges: Dict[Edge, Tuple[int, ...]]
    vertex_map: np.ndarray

    @property
    def edge_count(self) -> int:
        return len(self.edges)


def _snap_within(
    points: np.ndarray, tolerance: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Map each point to the nearest earlier representative within tolerance.

    Spatial hash with cell size = tolerance; a point only looks at the 27
    cells around its own. Representatives never move, so no point is
    displaced by more than the tolerance.
    """
    cells: Dict[Tuple[int, int, int], list] = {}
    keys = np.floor(points / tolerance).astype(np.int64)
    reps: list = []
    mapping = np.empty(len(points), dtype=np.int64)
    offsets = list(itertools.product((-1, 0, 1), repeat=3))

    for index, (point, key) in enumerate(zip(points, keys)):
        kx, ky, kz = (int(k) for k in key)
        best = -1
        best_dist = np.inf
        for dx, dy, dz in offsets:
            for rep in cells.get((kx + dx, ky + dy, kz + dz), ()):
                dist = float(np.linalg.norm(points[reps[rep]] - point))
                if dist > tolerance:
                    continue
                if dist < best_dist or (dist == best_dist and rep < best):
                    best, best_dist = rep, dist
        if best < 0:
            best = len(reps)
            reps.append(index)
            cells.setdefault((kx, ky, kz), []).append(best)
        mapping[index] = best

    return np.asarray(reps, dtype=np.int64), mapping


def weld_vertices(
    mesh: TriangleMesh, tolerance: float = WELD_TOLERANCE
) -> WeldedMesh:
    """Merge coincident vertices and build edge adjacency.

    Facet count never changes; facets collapsed by welding keep their
    slot; their zero-length edges stay out of the adjacency.
    """
    if tolerance < 0:
        raise ValueError("Welding tolerance must be >= 0")

    unique, inverse = np.unique(mesh.vertices, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)

    if tolerance > 0 and len(unique) > 1:
        reps, snapped = _snap_within(unique, tolerance)
        vertices = unique[reps]
        vertex_map = snapped[inverse]
    else:
        vertices = unique
        vertex_map = inverse

    facets = vertex_map[mesh.facets]

    pairs = np.sort(facets[:, [0, 1, 1, 2, 2, 0]].reshape(-1, 2), axis=1)
    owners = np.repeat(np.arange(len(facets)), 3)
    keep = pairs[:, 0] != pairs[:, 1]
    pairs, owners = pairs[keep], owners[keep]

    edges: Dict[Edge, Tuple[int, ...]] = {}
    if len(pairs):
        unique_edges, edge_ids = np.unique(pairs, axis=0, return_inverse=True)
        edge_ids = edge_ids.reshape(-1)
        order = np.argsort(edge_ids, kind="stable")
        splits = np.cumsum(np.bincount(edge_ids, minlength=len(unique_edges)))[:-1]
        for (a, b), group in zip(unique_edges, np.split(owners[order], splits)):
            edges[(int(a), int(b))] = tuple(sorted(set(int(f) for f in group)))

    logger.debug(
        "Welded %d -> %d vertices, %d edges",
        mesh.vertex_count,
        len(vertices),
        len(edges),
    )
    return WeldedMesh(
        vertices=vertices, facets=facets, edges=edges, vertex_map=vertex_map
    )
