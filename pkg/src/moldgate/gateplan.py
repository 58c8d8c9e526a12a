"""Gate placement: nodal grid, ring projection, feasibility, selection.

Nodes of a regular lattice over the part footprint are projected along
-D_d together with a ring of radius R_gate around each node. A node is
feasible when its own ray and every ring ray land on the part, the first
hit faces the demolding side, and (unless disabled) all ring depths
agree with the node depth. The gate is the feasible surface point
closest to the centre of mass; aesthetic mode takes the closest
parting-line point instead.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .constants import (
    DEFAULT_DIRECTION,
    DEFAULT_RING_SAMPLES,
    DISTANCE_DECIMALS,
    FOOTPRINT_EPS,
    GRID_DIAGONAL_DIVISOR,
    GRID_EDGE_PERCENTILE,
    GRID_PLANE_OFFSET,
    MIN_RING_SAMPLES,
    REJECTION_REASONS,
)
from .errors import (
    DegenerateFootprintError,
    NoFeasibleGateError,
    ThicknessViolationError,
)
from .mass import mesh_center_of_mass
from .mesh import Aabb, TriangleMesh, bounding_box, weld_vertices
from .parting import parting_line_candidates, polyline_candidates
from .rheology import MaterialParams, pressure_drop, size_gate
from .spatial import Hit, Intersector, build_accel, to_hits

logger = logging.getLogger(__name__)

Point = Tuple[float, float, float]
NodeId = Tuple[int, int]
ProgressCallback = Callable[[int, int], None]

# Nodes per ray batch handed to one worker
NODE_BLOCK = 256


def _unit(vector: Sequence[float]) -> np.ndarray:
    v = np.asarray(vector, dtype=np.float64).reshape(3)
    norm = float(np.linalg.norm(v))
    if not np.isfinite(norm) or norm == 0:
        raise ValueError("Demolding direction must be a non-zero vector")
    return v / norm


@dataclass(frozen=True)
class PlanConfig:
    """Planner settings.

    ``depth_coherence_tol`` defaults to the part thickness; setting
    ``depth_check`` to False gives the plain node + ring hit test.
    Candidates are ranked by 3D distance to C_CM, then planar distance
    from the node to the projected C_CM, then lattice index (i, j).
    """

    part_thickness: float
    demold_dir: Point = DEFAULT_DIRECTION
    grid_spacing: Optional[float] = None
    ring_samples: int = DEFAULT_RING_SAMPLES
    aesthetic: bool = False
    depth_coherence_tol: Optional[float] = None
    depth_check: bool = True
    rect_aspect: Optional[float] = None
    parting_line: Optional[Tuple[Point, ...]] = field(default=None, repr=False)
    tie_break: str = "distance,planar,index"

    def __post_init__(self):
        d = _unit(self.demold_dir)
        object.__setattr__(self, "demold_dir", (float(d[0]), float(d[1]), float(d[2])))
        if not self.part_thickness > 0:
            raise ValueError("Part thickness H must be positive")
        if self.grid_spacing is not None and not self.grid_spacing > 0:
            raise ValueError("Grid spacing must be positive")
        if self.ring_samples < MIN_RING_SAMPLES:
            raise ValueError(f"Ring samples must be >= {MIN_RING_SAMPLES}")
        tol = self.depth_coherence_tol
        if tol is not None and not tol >= 0:
            raise ValueError("Depth coherence tolerance must be >= 0")
        if self.rect_aspect is not None and not self.rect_aspect >= 1:
            raise ValueError("Rectangular gate aspect must be >= 1")

    @property
    def coherence_tol(self) -> Optional[float]:
        if not self.depth_check:
            return None
        if self.depth_coherence_tol is None:
            return self.part_thickness
        return self.depth_coherence_tol


def grid_frame(direction: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Orthonormal in-plane axes (u, v) with u x v = D_d.

    u comes from the world axis least aligned with D_d (first on ties),
    so +Z gives (X, Y) and +X gives (Y, Z).
    """
    d = _unit(direction)
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(d)))] = 1.0
    u = helper - np.dot(helper, d) * d
    u /= np.linalg.norm(u)
    v = np.cross(d, u)
    return u, v


@dataclass(frozen=True, eq=False)
class NodalGrid:
    """Lattice of nodes (i, j) at planar coordinates (s[i], t[j]).

    Planar coordinates are p.u and p.v; the grid plane lies at
    p.D_d = ``height``.
    """

    u: np.ndarray
    v: np.ndarray
    direction: np.ndarray
    height: float
    s: np.ndarray
    t: np.ndarray
    spacing: float

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.s), len(self.t)

    @property
    def node_count(self) -> int:
        return len(self.s) * len(self.t)

    def nodes(self) -> List[NodeId]:
        return [(i, j) for i in range(len(self.s)) for j in range(len(self.t))]

    def planar(self, node: NodeId) -> Tuple[float, float]:
        i, j = node
        return float(self.s[i]), float(self.t[j])

    def world(self, s, t) -> np.ndarray:
        """World positions on the grid plane for planar coordinates."""
        s = np.asarray(s, dtype=np.float64)[..., None]
        t = np.asarray(t, dtype=np.float64)[..., None]
        return s * self.u + t * self.v + self.height * self.direction

    def project(self, point: Sequence[float]) -> Tuple[float, float]:
        p = np.asarray(point, dtype=np.float64)
        return float(p @ self.u), float(p @ self.v)


def _lattice_axis(lo: float, hi: float, spacing: float) -> np.ndarray:
    steps = max(int(math.ceil((hi - lo) / spacing - 1e-9)), 1)
    coords = lo + np.arange(steps + 1) * spacing
    coords[-1] = hi
    return np.minimum(coords, hi)


def build_grid(aabb: Aabb, direction: Sequence[float], spacing: float) -> NodalGrid:
    """Lattice anchored at the footprint's min corner, clamped to its max edge."""
    if not spacing > 0:
        raise ValueError("Grid spacing must be positive")
    d = _unit(direction)
    u, v = grid_frame(d)
    corners = aabb.corners()
    su, sv, sd = corners @ u, corners @ v, corners @ d

    if su.max() - su.min() <= FOOTPRINT_EPS or sv.max() - sv.min() <= FOOTPRINT_EPS:
        raise DegenerateFootprintError(
            "Part footprint perpendicular to the demolding direction is degenerate"
        )

    grid = NodalGrid(
        u=u,
        v=v,
        direction=d,
        height=float(sd.max() + GRID_PLANE_OFFSET),
        s=_lattice_axis(float(su.min()), float(su.max()), spacing),
        t=_lattice_axis(float(sv.min()), float(sv.max()), spacing),
        spacing=float(spacing),
    )
    logger.debug("Grid %dx%d at spacing %.4f mm", *grid.shape, spacing)
    return grid


def default_spacing(mesh: TriangleMesh) -> float:
    """max(bbox diagonal / 200, 5th percentile of non-zero edge lengths)."""
    triangles = mesh.triangles
    edges = np.linalg.norm(triangles - np.roll(triangles, 1, axis=1), axis=2).ravel()
    edges = edges[edges > 0]
    by_diagonal = bounding_box(mesh).diagonal / GRID_DIAGONAL_DIVISOR
    by_detail = float(np.percentile(edges, GRID_EDGE_PERCENTILE)) if len(edges) else 0.0
    return max(by_diagonal, by_detail)


def ring_points(node: Sequence[float], R_gate: float, m: int) -> np.ndarray:
    """m planar points at distance R_gate around ``node``, theta = 2 pi k / m."""
    if not R_gate > 0:
        raise ValueError("Gate radius must be positive")
    if m < MIN_RING_SAMPLES:
        raise ValueError(f"Ring samples must be >= {MIN_RING_SAMPLES}")
    theta = 2.0 * np.pi * np.arange(m) / m
    return np.column_stack(
        (R_gate * np.cos(theta) + node[0], R_gate * np.sin(theta) + node[1])
    )


@dataclass(frozen=True)
class NodeEvaluation:
    node: NodeId
    planar: Tuple[float, float]
    feasible: bool
    hit: Optional[Hit] = None
    # min and max ray depth over the ring rays that hit
    ring_depth: Optional[Tuple[float, float]] = None
    surface_point: Optional[Point] = None
    distance_to_cm: Optional[float] = None
    reason: Optional[str] = None


def _evaluate_block(
    intersector: Intersector,
    grid: NodalGrid,
    nodes: Sequence[NodeId],
    R_gate: float,
    config: PlanConfig,
    c_cm: np.ndarray,
) -> List[NodeEvaluation]:
    m = config.ring_samples
    centres = np.array([grid.planar(node) for node in nodes])
    offsets = ring_points((0.0, 0.0), R_gate, m)
    planar = np.concatenate(
        (centres[:, None, :], centres[:, None, :] + offsets[None, :, :]), axis=1
    )
    origins = grid.world(planar[..., 0], planar[..., 1]).reshape(-1, 3)
    down = -grid.direction
    directions = np.broadcast_to(down, origins.shape)

    facet_ids, ts = intersector.cast(origins, directions)
    facet_ids = facet_ids.reshape(len(nodes), m + 1)
    ts = ts.reshape(len(nodes), m + 1)
    node_hits = to_hits(
        intersector, origins[:: m + 1], directions[:: m + 1], facet_ids[:, 0], ts[:, 0]
    )
    tol = config.coherence_tol

    results = []
    for k, node in enumerate(nodes):
        base = NodeEvaluation(node=node, planar=grid.planar(node), feasible=False)
        hit = node_hits[k]
        if hit is None:
            results.append(replace(base, reason="footprint-miss"))
            continue

        ring_hit = facet_ids[k, 1:] >= 0
        ring_t = ts[k, 1:][ring_hit]
        depth = (float(ring_t.min()), float(ring_t.max())) if len(ring_t) else None
        base = replace(base, hit=hit, ring_depth=depth)

        if float(intersector.facets.normals[hit.facet] @ grid.direction) <= 0:
            results.append(replace(base, reason="back-facing"))
        elif not ring_hit.all():
            results.append(replace(base, reason="ring-miss"))
        elif tol is not None and np.any(np.abs(ring_t - hit.t) > tol):
            results.append(replace(base, reason="depth-incoherent"))
        else:
            distance = float(np.linalg.norm(np.asarray(hit.point) - c_cm))
            results.append(
                replace(
                    base,
                    feasible=True,
                    surface_point=hit.point,
                    distance_to_cm=distance,
                )
            )
    return results


def evaluate_nodes(
    intersector: Intersector,
    grid: NodalGrid,
    R_gate: float,
    config: PlanConfig,
    c_cm: Sequence[float],
    nodes: Optional[Sequence[NodeId]] = None,
    workers: int = 1,
    progress: Optional[ProgressCallback] = None,
) -> List[NodeEvaluation]:
    """Evaluate nodes (all, in (i, j) order, by default) in blocks.

    Blocks may run on up to ``workers`` threads; results always come back
    in node order, so output does not depend on scheduling.
    """
    nodes = grid.nodes() if nodes is None else list(nodes)
    if R_gate >= config.part_thickness:
        return [
            NodeEvaluation(
                node=node,
                planar=grid.planar(node),
                feasible=False,
                reason="thickness-violation",
            )
            for node in nodes
        ]

    cm = np.asarray(c_cm, dtype=np.float64)
    blocks = [nodes[s : s + NODE_BLOCK] for s in range(0, len(nodes), NODE_BLOCK)]

    def run(block: Sequence[NodeId]) -> List[NodeEvaluation]:
        return _evaluate_block(intersector, grid, block, R_gate, config, cm)

    results: List[NodeEvaluation] = []
    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for chunk in pool.map(run, blocks):
                results.extend(chunk)
                if progress:
                    progress(len(results), len(nodes))
    else:
        for block in blocks:
            results.extend(run(block))
            if progress:
                progress(len(results), len(nodes))
    return results


def evaluate_node(
    intersector: Intersector,
    grid: NodalGrid,
    node: NodeId,
    R_gate: float,
    config: PlanConfig,
    c_cm: Sequence[float],
) -> NodeEvaluation:
    """Evaluate one node: rejection reason or surface point and distances."""
    return evaluate_nodes(intersector, grid, R_gate, config, c_cm, nodes=[node])[0]


def rejection_histogram(evaluations: Sequence[NodeEvaluation]) -> Dict[str, int]:
    """Rejected node count per reason, every reason present."""
    counts = Counter(e.reason for e in evaluations if not e.feasible)
    return {reason: counts.get(reason, 0) for reason in REJECTION_REASONS}


def selection_key(
    evaluation: NodeEvaluation, cm_planar: Tuple[float, float]
) -> Tuple[float, float, int, int]:
    planar = math.hypot(
        evaluation.planar[0] - cm_planar[0], evaluation.planar[1] - cm_planar[1]
    )
    return (
        round(evaluation.distance_to_cm, DISTANCE_DECIMALS),  # type: ignore[arg-type]
        round(planar, DISTANCE_DECIMALS),
        evaluation.node[0],
        evaluation.node[1],
    )


def select_gate(
    evaluations: Sequence[NodeEvaluation], c_cm: Sequence[float], grid: NodalGrid
) -> NodeEvaluation:
    """Feasible evaluation with the smallest selection key."""
    feasible = [e for e in evaluations if e.feasible]
    if not feasible:
        raise NoFeasibleGateError(rejection_histogram(evaluations))
    cm_planar = grid.project(c_cm)
    return min(feasible, key=lambda e: selection_key(e, cm_planar))


def nearest_candidate(candidates: np.ndarray, c_cm: Sequence[float]) -> np.ndarray:
    """Candidate point closest to C_CM; ties go to the smallest (x, y, z)."""
    points = np.asarray(candidates, dtype=np.float64).reshape(-1, 3)
    distances = np.round(
        np.linalg.norm(points - np.asarray(c_cm, dtype=np.float64), axis=1),
        DISTANCE_DECIMALS,
    )
    rounded = np.round(points, DISTANCE_DECIMALS)
    order = np.lexsort((rounded[:, 2], rounded[:, 1], rounded[:, 0], distances))
    return points[order[0]]


def flow_length_proxy(mesh: TriangleMesh, gate_point: Sequence[float]) -> float:
    """Largest straight-line distance from the gate to any vertex (upper bound)."""
    offsets = mesh.vertices - np.asarray(gate_point, dtype=np.float64)
    return float(np.sqrt(np.max(np.einsum("ij,ij->i", offsets, offsets))))


@dataclass(frozen=True)
class GatePlan:
    status: str
    mode: str
    material: MaterialParams
    config: PlanConfig
    c_cm: Point
    surface_area: float
    R_gate: float
    v_bar: float
    rectangular: Optional[Tuple[float, float]]
    grid_spacing: float
    grid_shape: Tuple[int, int]
    total_nodes: int
    feasible_nodes: int
    rejections: Dict[str, int]
    gate_point: Optional[Point] = None
    gate_facet: Optional[int] = None
    chosen_node: Optional[NodeId] = None
    distance_to_cm: Optional[float] = None
    flow_length: Optional[float] = None
    pressure_drop: Optional[float] = None
    parting_candidates: Optional[int] = None
    evaluations: Tuple[NodeEvaluation, ...] = field(default=(), repr=False, compare=False)

    @property
    def feasible(self) -> bool:
        return self.status == "feasible"


def _as_point(values) -> Point:
    return (float(values[0]), float(values[1]), float(values[2]))


def plan_gate(
    mesh: TriangleMesh,
    material: MaterialParams,
    config: PlanConfig,
    workers: int = 1,
    progress: Optional[ProgressCallback] = None,
    intersector: Optional[Intersector] = None,
) -> GatePlan:
    """Centre of mass, gate sizing, grid evaluation, selection and dP.

    Raises ThicknessViolationError when R_gate >= H and
    NoFeasibleGateError (carrying the infeasible plan) when no node
    qualifies in standard mode.
    """
    com = mesh_center_of_mass(mesh)
    sizing = size_gate(material, config.rect_aspect)
    if sizing.R_gate >= config.part_thickness:
        raise ThicknessViolationError(sizing.R_gate, config.part_thickness)

    spacing = config.grid_spacing or default_spacing(mesh)
    grid = build_grid(bounding_box(mesh), config.demold_dir, spacing)
    if intersector is None:
        intersector = build_accel(mesh)

    evaluations = evaluate_nodes(
        intersector,
        grid,
        sizing.R_gate,
        config,
        com.point,
        workers=workers,
        progress=progress,
    )
    rejections = rejection_histogram(evaluations)
    feasible_count = sum(1 for e in evaluations if e.feasible)
    logger.debug("%d of %d node(s) feasible", feasible_count, len(evaluations))

    plan = GatePlan(
        status="infeasible",
        mode="aesthetic" if config.aesthetic else "standard",
        material=material,
        config=config,
        c_cm=com.point,
        surface_area=com.total_area,
        R_gate=sizing.R_gate,
        v_bar=sizing.v_bar,
        rectangular=sizing.rectangular,
        grid_spacing=spacing,
        grid_shape=grid.shape,
        total_nodes=len(evaluations),
        feasible_nodes=feasible_count,
        rejections=rejections,
        evaluations=tuple(evaluations),
    )

    if config.aesthetic:
        if config.parting_line is not None:
            candidates = polyline_candidates(np.asarray(config.parting_line), spacing)
        else:
            candidates = parting_line_candidates(
                weld_vertices(mesh), config.demold_dir, spacing
            )
        gate = _as_point(nearest_candidate(candidates, com.point))
        chosen = {"parting_candidates": len(candidates)}
    else:
        try:
            best = select_gate(evaluations, com.point, grid)
        except NoFeasibleGateError as exc:
            raise NoFeasibleGateError(exc.rejections, plan) from None
        gate = best.surface_point  # type: ignore[assignment]
        chosen = {
            "chosen_node": best.node,
            "gate_facet": best.hit.facet,  # type: ignore[union-attr]
        }

    flow_length = flow_length_proxy(mesh, gate)
    return replace(
        plan,
        **chosen,
        status="feasible",
        gate_point=gate,
        distance_to_cm=float(np.linalg.norm(np.subtract(gate, com.point))),
        flow_length=flow_length,
        pressure_drop=pressure_drop(
            material.mu_opt, flow_length, sizing.v_bar, config.part_thickness
        ),
    )
