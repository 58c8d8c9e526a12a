"""Constants for moldgate."""

from typing import Dict, Tuple

# Mesh input

# Binary STL layout: 80-byte header, uint32 facet count, 50-byte records
STL_HEADER_SIZE: int = 80
STL_COUNT_SIZE: int = 4
STL_RECORD_SIZE: int = 50

# A stored normal is kept only if its length is within this of 1
NORMAL_UNIT_TOLERANCE: float = 1e-4

# Default welding tolerance (mm)
WELD_TOLERANCE: float = 1e-6

# Ray casting

# |unit normal . direction| below this is treated as parallel (miss)
PARALLEL_EPS: float = 1e-12

# Slack on barycentric bounds so rays through shared edges never fall
# between two facets
BARYCENTRIC_EPS: float = 1e-9

# Hits whose ray parameters agree to this many mm are the same hit
HIT_DEDUP_DECIMALS: int = 9

# Maximum facets per BVH leaf
BVH_LEAF_SIZE: int = 8

# Ray direction must have unit norm within this
UNIT_TOLERANCE: float = 1e-12

# Gate planning

DEFAULT_DIRECTION: Tuple[float, float, float] = (0.0, 0.0, 1.0)
DEFAULT_RING_SAMPLES: int = 16
MIN_RING_SAMPLES: int = 8
DEFAULT_RECT_ASPECT: float = 4.0

# Grid plane sits this far (mm) beyond the part along +D_d
GRID_PLANE_OFFSET: float = 1.0

# Default spacing = max(diagonal / GRID_DIAGONAL_DIVISOR, edge percentile)
GRID_DIAGONAL_DIVISOR: float = 200.0
GRID_EDGE_PERCENTILE: float = 5.0

# Facet visibility threshold for silhouette extraction
SILHOUETTE_EPS: float = 1e-6

# Candidate distances are compared after rounding to this many decimals (mm)
DISTANCE_DECIMALS: int = 9

# Footprint extents below this (mm) are degenerate
FOOTPRINT_EPS: float = 1e-9

REJECTION_REASONS: Tuple[str, ...] = (
    "footprint-miss",
    "ring-miss",
    "back-facing",
    "depth-incoherent",
    "thickness-violation",
)

# Report and export

SCHEMA_VERSION: int = 1
LENGTH_DECIMALS: int = 4
PRESSURE_DECIMALS: int = 3
VELOCITY_DECIMALS: int = 4

DEFAULT_REPORT_NAME: str = "moldgate-report.json"

# Icosphere marker: icosahedron refined this many times (20 -> 80 facets)
MARKER_SUBDIVISIONS: int = 1

PART_COLOR: Tuple[int, int, int] = (190, 190, 190)
MARKER_COLOR: Tuple[int, int, int] = (220, 40, 40)

# Report keys and the unit each one carries
REPORT_UNITS: Dict[str, str] = {
    "C_CM": "mm",
    "C_pointfill": "mm",
    "R_gate": "mm",
    "rectangular_gate.width": "mm",
    "rectangular_gate.height": "mm",
    "flow_length_proxy": "mm",
    "grid_spacing": "mm",
    "part_thickness": "mm",
    "distance_to_cm": "mm",
    "surface_area": "mm^2",
    "v_bar": "mm/s",
    "pressure_drop": "MPa",
    "duration": "s",
}

# Materials

MATERIALS_ENV_VAR: str = "MOLDGATE_MATERIALS"
MATERIAL_FIELDS: Tuple[str, ...] = (
    "n",
    "T_melt",
    "T_wall",
    "gamma_opt",
    "mu_opt",
    "kappa",
)
