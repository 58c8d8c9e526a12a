"""JSON report and vertex-coloured PLY export of a gate plan."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .constants import (
    LENGTH_DECIMALS,
    MARKER_COLOR,
    MARKER_SUBDIVISIONS,
    MATERIAL_FIELDS,
    PART_COLOR,
    PRESSURE_DECIMALS,
    REPORT_UNITS,
    SCHEMA_VERSION,
    VELOCITY_DECIMALS,
)
from .errors import ExportError, ReportError
from .gateplan import GatePlan
from .mesh import TriangleMesh

FLOW_LENGTH_NOTE = "upper-bound proxy: farthest-vertex Euclidean distance from the gate"


@dataclass(frozen=True)
class ReportMetadata:
    tool_version: str
    input_name: str
    input_digest: str
    facet_count: int
    degenerate_facets: int = 0
    duplicate_facets: int = 0
    duration: float = 0.0
    parting_line_file: Optional[str] = None


def _fixed(value: Optional[float], decimals: int) -> Optional[float]:
    if value is None:
        return None
    # + 0.0 folds -0.0 into 0.0
    return round(float(value), decimals) + 0.0


def _point(values: Optional[Sequence[float]]) -> Optional[list]:
    if values is None:
        return None
    return [_fixed(v, LENGTH_DECIMALS) for v in values]


def report_document(plan: GatePlan, metadata: ReportMetadata) -> Dict[str, Any]:
    """Nested report structure; every value is JSON-native."""
    config = plan.config
    material = plan.material
    rectangular = None
    if plan.rectangular is not None:
        width, height = plan.rectangular
        rectangular = {
            "aspect": config.rect_aspect,
            "width": _fixed(width, LENGTH_DECIMALS),
            "height": _fixed(height, LENGTH_DECIMALS),
        }

    return {
        "schema_version": SCHEMA_VERSION,
        "tool": {"name": "moldgate", "version": metadata.tool_version},
        "input": {
            "name": metadata.input_name,
            "digest": metadata.input_digest,
            "degenerate_facets": metadata.degenerate_facets,
            "duplicate_facets": metadata.duplicate_facets,
            "facets": metadata.facet_count,
        },
        "status": plan.status,
        "mode": plan.mode,
        "material": {
            "name": material.name,
            **{name: getattr(material, name) for name in MATERIAL_FIELDS},
        },
        "config": {
            "demold_dir": list(config.demold_dir),
            "grid_spacing": config.grid_spacing,
            "ring_samples": config.ring_samples,
            "part_thickness": config.part_thickness,
            "aesthetic": config.aesthetic,
            "depth_check": config.depth_check,
            "depth_coherence_tol": config.coherence_tol,
            "rect_aspect": config.rect_aspect,
            "parting_line_file": metadata.parting_line_file,
            "tie_break": config.tie_break,
        },
        "results": {
            "C_CM": _point(plan.c_cm),
            "C_pointfill": _point(plan.gate_point),
            "surface_area": _fixed(plan.surface_area, LENGTH_DECIMALS),
            "R_gate": _fixed(plan.R_gate, LENGTH_DECIMALS),
            "v_bar": _fixed(plan.v_bar, VELOCITY_DECIMALS),
            "rectangular_gate": rectangular,
            "distance_to_cm": _fixed(plan.distance_to_cm, LENGTH_DECIMALS),
            "chosen_node": list(plan.chosen_node) if plan.chosen_node else None,
            "gate_facet": plan.gate_facet,
            "pressure_drop": _fixed(plan.pressure_drop, PRESSURE_DECIMALS),
            "flow_length_proxy": _fixed(plan.flow_length, LENGTH_DECIMALS),
            "flow_length_note": FLOW_LENGTH_NOTE,
            "parting_candidates": plan.parting_candidates,
        },
        "nodes": {
            "grid_spacing": _fixed(plan.grid_spacing, LENGTH_DECIMALS),
            "grid_shape": list(plan.grid_shape),
            "total": plan.total_nodes,
            "feasible": plan.feasible_nodes,
            "rejections": dict(plan.rejections),
        },
        "duration": _fixed(metadata.duration, 3),
        "units": dict(REPORT_UNITS),
    }


def render_report(plan: GatePlan, metadata: ReportMetadata) -> str:
    """Canonical UTF-8 JSON: sorted keys, two-space indent, trailing newline."""
    document = report_document(plan, metadata)
    text = json.dumps(
        document, sort_keys=True, indent=2, ensure_ascii=False, allow_nan=False
    )
    return text + "\n"


def parse_report(text: str) -> Dict[str, Any]:
    """Load a report and check its schema version."""
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ReportError(f"Report is not valid JSON: {e}")
    if not isinstance(document, dict):
        raise ReportError("Report must be a JSON object")
    version = document.get("schema_version")
    if version != SCHEMA_VERSION:
        raise ReportError(
            f"Unsupported report schema_version {version!r} (expected {SCHEMA_VERSION})"
        )
    return document


_PHI = (1.0 + math.sqrt(5.0)) / 2.0

_ICOSAHEDRON_VERTICES = (
    (-1, _PHI, 0), (1, _PHI, 0), (-1, -_PHI, 0), (1, -_PHI, 0),
    (0, -1, _PHI), (0, 1, _PHI), (0, -1, -_PHI), (0, 1, -_PHI),
    (_PHI, 0, -1), (_PHI, 0, 1), (-_PHI, 0, -1), (-_PHI, 0, 1),
)  # fmt: skip

# Counter-clockwise seen from outside
_ICOSAHEDRON_FACETS = (
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
)  # fmt: skip


@lru_cache(maxsize=8)
def _unit_icosphere(subdivisions: int) -> Tuple[np.ndarray, np.ndarray]:
    vertices = [np.array(v, dtype=np.float64) for v in _ICOSAHEDRON_VERTICES]
    facets = list(_ICOSAHEDRON_FACETS)

    for _ in range(subdivisions):
        midpoints: Dict[Tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (min(a, b), max(a, b))
            if key not in midpoints:
                midpoints[key] = len(vertices)
                vertices.append((vertices[a] + vertices[b]) / 2.0)
            return midpoints[key]

        refined = []
        for a, b, c in facets:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            refined += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        facets = refined

    points = np.array(vertices)
    points /= np.linalg.norm(points, axis=1)[:, None]
    return points, np.array(facets, dtype=np.int64)


def icosphere(
    center: Sequence[float], radius: float, subdivisions: int = MARKER_SUBDIVISIONS
) -> TriangleMesh:
    """Icosahedron refined ``subdivisions`` times: 20 * 4**s facets."""
    if not radius > 0:
        raise ValueError("Marker radius must be positive")
    unit, facets = _unit_icosphere(subdivisions)
    return TriangleMesh(unit * radius + np.asarray(center, dtype=np.float64), facets)


PLY_VERTEX = np.dtype(
    [
        ("x", "<f8"),
        ("y", "<f8"),
        ("z", "<f8"),
        ("red", "u1"),
        ("green", "u1"),
        ("blue", "u1"),
    ]
)
PLY_FACE = np.dtype([("count", "u1"), ("indices", "<i4", (3,))])


def export_marked_geometry(mesh: TriangleMesh, plan: GatePlan) -> bytes:
    """Binary little-endian PLY: grey part plus a red gate marker sphere.

    The marker has radius R_gate and is centred on C_pointfill.
    """
    if not plan.feasible or plan.gate_point is None:
        raise ExportError(
            "Cannot export marked geometry: the plan has no gate location"
        )

    marker = icosphere(plan.gate_point, plan.R_gate)
    parts = ((mesh, PART_COLOR), (marker, MARKER_COLOR))

    vertex_count = mesh.vertex_count + marker.vertex_count
    vertices = np.zeros(vertex_count, dtype=PLY_VERTEX)
    faces = np.zeros(mesh.facet_count + marker.facet_count, dtype=PLY_FACE)
    faces["count"] = 3

    v_start = f_start = 0
    for part, color in parts:
        v_end = v_start + part.vertex_count
        f_end = f_start + part.facet_count
        for axis, name in enumerate("xyz"):
            vertices[name][v_start:v_end] = part.vertices[:, axis]
        for channel, name in zip(color, ("red", "green", "blue")):
            vertices[name][v_start:v_end] = channel
        faces["indices"][f_start:f_end] = part.facets + v_start
        v_start, f_start = v_end, f_end

    header = "\n".join(
        [
            "ply",
            "format binary_little_endian 1.0",
            "comment moldgate part with gate marker",
            f"element vertex {len(vertices)}",
            "property double x",
            "property double y",
            "property double z",
            "property uchar red",
            "property uchar green",
            "property uchar blue",
            f"element face {len(faces)}",
            "property list uchar int vertex_indices",
            "end_header",
        ]
    )
    return (header + "\n").encode("ascii") + vertices.tobytes() + faces.tobytes()
