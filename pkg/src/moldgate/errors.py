"""Exception hierarchy for moldgate."""

from __future__ import annotations

from typing import TYPE_CHECKING, Iterable, Mapping, Optional

if TYPE_CHECKING:
    from .gateplan import GatePlan


class MoldgateError(Exception):
    """Base class for every error the CLI reports to the user."""


class StlParseError(MoldgateError):
    pass


class MeshValidationError(MoldgateError):
    pass


class MaterialError(MoldgateError):
    pass


class UnknownMaterialError(MaterialError):
    def __init__(self, name: str, available: Iterable[str]):
        self.name = name
        self.available = sorted(set(available))
        super().__init__(
            f"Unknown material '{name}'. Available: {', '.join(self.available)}"
        )


class ThicknessViolationError(MoldgateError):
    def __init__(self, gate_radius: float, thickness: float):
        self.gate_radius = gate_radius
        self.thickness = thickness
        super().__init__(
            f"R_gate must be smaller than part thickness "
            f"(R_gate = {gate_radius:.4f} mm, H = {thickness:.4f} mm)"
        )


class DegenerateFootprintError(MoldgateError):
    pass


class PartingLineError(MoldgateError):
    pass


class NoFeasibleGateError(MoldgateError):
    """No grid node passed the feasibility tests.

    ``plan`` is the infeasible GatePlan when raised by plan_gate, so
    callers can still report the rejection histogram.
    """

    def __init__(
        self, rejections: Mapping[str, int], plan: Optional[GatePlan] = None
    ):
        self.rejections = dict(rejections)
        self.plan = plan
        counts = ", ".join(
            f"{reason}: {count}" for reason, count in self.rejections.items() if count
        )
        super().__init__(f"No valid gate location ({counts or 'no nodes'})")


class ExportError(MoldgateError):
    pass


class ReportError(MoldgateError):
    pass
