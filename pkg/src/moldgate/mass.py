"""Facet areas, facet centroids and the superposition centre of mass.

The centre of mass is the area-weighted centroid of the triangulated
shell: every facet contributes its vertex mean weighted by its area.
For parts with non-uniform wall thickness this differs from the true
mass centroid; no volume integral is attempted.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from .errors import MeshValidationError
from .mesh import TriangleMesh, facet_cross

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FacetProperties:
    """Per-facet area (mm^2) and centroid (mm), in facet order."""

    areas: np.ndarray
    centroids: np.ndarray


@dataclass(frozen=True)
class CenterOfMass:
    point: Tuple[float, float, float]
    total_area: float


def facet_area(
    v1: Sequence[float], v2: Sequence[float], v3: Sequence[float]
) -> float:
    """Half the norm of (V2 - V1) x (V3 - V1)."""
    a = np.asarray(v1, dtype=np.float64)
    b = np.asarray(v2, dtype=np.float64)
    c = np.asarray(v3, dtype=np.float64)
    cross = np.cross(b - a, c - a)
    return float(0.5 * np.linalg.norm(cross))


def facet_centroid(
    v1: Sequence[float], v2: Sequence[float], v3: Sequence[float]
) -> Tuple[float, float, float]:
    mean = (
        np.asarray(v3, dtype=np.float64)
        + np.asarray(v2, dtype=np.float64)
        + np.asarray(v1, dtype=np.float64)
    ) / 3.0
    return (float(mean[0]), float(mean[1]), float(mean[2]))


def facet_properties(mesh: TriangleMesh) -> FacetProperties:
    """Area and centroid of every facet."""
    areas = 0.5 * np.linalg.norm(facet_cross(mesh.vertices, mesh.facets), axis=1)
    triangles = mesh.triangles
    centroids = (triangles[:, 2] + triangles[:, 1] + triangles[:, 0]) / 3.0
    return FacetProperties(areas=areas, centroids=centroids)


def mesh_center_of_mass(mesh: TriangleMesh) -> CenterOfMass:
    """Area-weighted mean of facet centroids, accumulated in facet order."""
    props = facet_properties(mesh)
    total = float(np.add.reduce(props.areas))
    if not total > 0:
        raise MeshValidationError("Mesh has zero total area")

    weighted = np.add.reduce(props.centroids * props.areas[:, None], axis=0)
    point = weighted / total
    logger.debug("C_CM = %s over %.4f mm^2", point, total)
    return CenterOfMass(
        point=(float(point[0]), float(point[1]), float(point[2])),
        total_area=total,
    )
