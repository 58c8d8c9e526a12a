"""Parting-line candidates for aesthetic gating.

The parting line is approximated by silhouette edges with respect to the
demolding direction: edges shared by a facet that faces +D_d and one that
does not. An externally supplied polyline replaces the approximation.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Sequence

import numpy as np

from .constants import DISTANCE_DECIMALS, SILHOUETTE_EPS
from .errors import PartingLineError
from .mesh import WeldedMesh, facet_cross

logger = logging.getLogger(__name__)


def classify_facets(welded: WeldedMesh, direction: Sequence[float]) -> np.ndarray:
    """+1 visible, -1 hidden, 0 vertical, per welded facet."""
    d = np.asarray(direction, dtype=np.float64)
    cross = facet_cross(welded.vertices, welded.facets)
    norms = np.linalg.norm(cross, axis=1)
    alignment = np.zeros(len(cross))
    nonzero = norms > 0
    alignment[nonzero] = (cross[nonzero] @ d) / norms[nonzero]
    return np.where(
        alignment > SILHOUETTE_EPS, 1, np.where(alignment < -SILHOUETTE_EPS, -1, 0)
    )


def silhouette_edges(welded: WeldedMesh, direction: Sequence[float]) -> list:
    classes = classify_facets(welded, direction)
    edges = []
    for edge, owners in welded.edges.items():
        visible = [classes[f] == 1 for f in owners]
        if any(visible) and not all(visible):
            edges.append(edge)
    return sorted(edges)


def _sample_segment(a: np.ndarray, b: np.ndarray, spacing: float) -> np.ndarray:
    length = float(np.linalg.norm(b - a))
    if length == 0:
        return a[None, :]
    steps = np.arange(0.0, length, spacing)
    points = a + (steps / length)[:, None] * (b - a)
    return np.vstack([points, b[None, :]])


def _unique_sorted(points: np.ndarray) -> np.ndarray:
    # np.unique orders rows lexicographically
    _, index = np.unique(
        np.round(points, DISTANCE_DECIMALS), axis=0, return_index=True
    )
    return points[index]


def parting_line_candidates(
    welded: WeldedMesh, direction: Sequence[float], spacing: float
) -> np.ndarray:
    """Points along silhouette edges at arc-length ``spacing`` plus endpoints.

    Returned in lexicographic coordinate order without duplicates.
    """
    if spacing <= 0:
        raise ValueError("Spacing must be positive")
    edges = silhouette_edges(welded, direction)
    if not edges:
        raise PartingLineError(
            "No silhouette edges for this demolding direction; "
            "aesthetic mode is unavailable (supply a parting-line file)"
        )

    samples = [
        _sample_segment(welded.vertices[a], welded.vertices[b], spacing)
        for a, b in edges
    ]
    points = _unique_sorted(np.vstack(samples))
    logger.debug("%d silhouette edge(s), %d candidate(s)", len(edges), len(points))
    return points


def load_parting_line(path: str | Path) -> np.ndarray:
    """Read a polyline: one "x y z" triple per line, closed if first == last."""
    points = []
    text = Path(path).read_text(encoding="utf-8")
    for number, line in enumerate(text.splitlines(), start=1):
        entry = line.strip()
        if not entry or entry.startswith("#"):
            continue
        parts = entry.replace(",", " ").split()
        if len(parts) != 3:
            raise PartingLineError(f"{path}:{number}: expected 'x y z'")
        try:
            points.append([float(p) for p in parts])
        except ValueError:
            raise PartingLineError(f"{path}:{number}: invalid number")
    if not points:
        raise PartingLineError(f"{path}: parting line has no points")

    array = np.asarray(points, dtype=np.float64)
    if not np.all(np.isfinite(array)):
        raise PartingLineError(f"{path}: NaN or infinite coordinate")
    return array


def polyline_candidates(points: np.ndarray, spacing: float) -> np.ndarray:
    """Sample every polyline segment like a silhouette edge."""
    if spacing <= 0:
        raise ValueError("Spacing must be positive")
    points = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    if len(points) == 1:
        return points.copy()
    samples = [
        _sample_segment(a, b, spacing) for a, b in zip(points[:-1], points[1:])
    ]
    return _unique_sorted(np.vstack(samples))
