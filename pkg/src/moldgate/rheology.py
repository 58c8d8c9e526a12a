"""Gate sizing from material data and the cavity pressure-drop estimate.

Unit regime: temperatures in degC, conductivity in W/(m.degC), viscosity
in Pa.s, shear rate in 1/s, lengths in mm. The front velocity is
evaluated in SI (m/s) and converted to mm/s.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

from .constants import DEFAULT_RECT_ASPECT
from .errors import MaterialError


@dataclass(frozen=True)
class MaterialParams:
    name: str
    n: float
    T_melt: float
    T_wall: float
    gamma_opt: float
    mu_opt: float
    kappa: float

    def __post_init__(self):
        problems = []
        if not 0 < self.n <= 1:
            problems.append("n must be in (0, 1]")
        if not self.T_melt > self.T_wall:
            problems.append("T_melt must exceed T_wall")
        for field_name in ("gamma_opt", "mu_opt", "kappa"):
            if not getattr(self, field_name) > 0:
                problems.append(f"{field_name} must be positive")
        if problems:
            raise MaterialError(
                f"Invalid material '{self.name}': {'; '.join(problems)}"
            )


@dataclass(frozen=True)
class GateSizing:
    v_bar: float
    R_gate: float
    rectangular: Optional[Tuple[float, float]] = None


def mean_front_velocity(mat: MaterialParams) -> float:
    """v = sqrt(5 (T_melt - T_wall) kappa / (3 mu_opt)), in mm/s."""
    radicand = 5.0 * (mat.T_melt - mat.T_wall) * mat.kappa / (3.0 * mat.mu_opt)
    if radicand <= 0:
        raise MaterialError(f"Non-positive velocity radicand for '{mat.name}'")
    return math.sqrt(radicand) * 1000.0


def gate_radius(mat: MaterialParams) -> float:
    """R_gate = (3 + 1/n) v / gamma_opt, in mm."""
    return (3.0 + 1.0 / mat.n) * mean_front_velocity(mat) / mat.gamma_opt


def rectangular_gate(
    R_gate: float, aspect: float = DEFAULT_RECT_ASPECT
) -> Tuple[float, float]:
    """Width and height (w = aspect * h) whose hydraulic radius equals R_gate.

    Hydraulic radius w h / (2 (w + h)) with w = k h gives
    h = 2 R (k + 1) / k.
    """
    if not aspect >= 1:
        raise ValueError("Rectangular gate aspect must be >= 1 (width >= height)")
    if not R_gate >= 0:
        raise ValueError("Gate radius must be >= 0")
    height = 2.0 * R_gate * (aspect + 1.0) / aspect
    return aspect * height, height


def pressure_drop(mu: float, L: float, v_bar: float, H: float) -> float:
    """dP = 12 mu L v / H^2, inputs in Pa.s, mm, mm/s, mm; result in MPa."""
    if H <= 0:
        raise ValueError("Part thickness must be positive")
    if L < 0:
        raise ValueError("Flow length must be >= 0")
    pascal = 12.0 * mu * (L / 1000.0) * (v_bar / 1000.0) / (H / 1000.0) ** 2
    return pascal / 1e6


def size_gate(mat: MaterialParams, aspect: Optional[float] = None) -> GateSizing:
    """Mean front velocity, gate radius and the optional rectangular gate."""
    v_bar = mean_front_velocity(mat)
    radius = gate_radius(mat)
    rectangular = rectangular_gate(radius, aspect) if aspect is not None else None
    return GateSizing(v_bar=v_bar, R_gate=radius, rectangular=rectangular)
