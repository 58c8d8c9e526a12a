"""Console output for moldgate.

Everything human-facing goes to stderr; stdout only carries the report path.
"""

import logging
from typing import Iterable, Optional

from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape

from .utils import format_duration, format_size


console = Console(stderr=True)


def configure_logging(verbose: bool = False, quiet: bool = False):
    """Route library logging through the shared console."""
    level = logging.DEBUG if verbose else logging.ERROR if quiet else logging.WARNING
    handler = RichHandler(
        console=console,
        show_time=False,
        show_path=False,
        markup=False,
        rich_tracebacks=False,
    )
    handler.setFormatter(logging.Formatter("%(message)s"))
    root = logging.getLogger("moldgate")
    root.handlers[:] = [handler]
    root.setLevel(level)


def print_error(message: str):
    """Print an error line to stderr."""
    console.print(f"  [red]x[/red] {escape(message)}", highlight=False, soft_wrap=True)


def print_loaded(path: str, size: int, facets: int, vertices: int):
    """Print input file size and mesh counts."""
    console.print(
        f"  [dim]Loaded[/dim] {path} [dim]({format_size(size)}, "
        f"{facets} facet(s), {vertices} vertex(es))[/dim]"
    )


def print_material(name: str, R_gate: float, v_bar: float):
    console.print(
        f"  [dim]Material[/dim] {name} "
        f"[dim](R_gate {R_gate:.4f} mm, v {v_bar:.1f} mm/s)[/dim]"
    )


def print_rectangular(width: float, height: float):
    console.print(
        f"  [dim]Rectangular gate[/dim] {width:.4f} x {height:.4f} mm"
    )


def print_plan(plan):
    """Print node statistics and the chosen gate."""
    console.print()
    rows, cols = plan.grid_shape
    console.print(
        f"  {plan.feasible_nodes} of {plan.total_nodes} node(s) feasible "
        f"[dim]({rows}x{cols} grid, spacing {plan.grid_spacing:.4f} mm)[/dim]"
    )
    rejected = [
        f"{count} {reason}" for reason, count in plan.rejections.items() if count
    ]
    if rejected:
        console.print(f"  [dim]rejected: {', '.join(rejected)}[/dim]")

    if plan.gate_point is not None:
        x, y, z = plan.gate_point
        console.print(
            f"  [green]+[/green] Gate ({plan.mode}) at "
            f"[bold]({x:.4f}, {y:.4f}, {z:.4f})[/bold] "
            f"[dim]{plan.distance_to_cm:.4f} mm from C_CM[/dim]"
        )
        console.print(
            f"  [dim]dP {plan.pressure_drop:.3f} MPa over L {plan.flow_length:.4f} mm "
            f"(upper-bound proxy)[/dim]"
        )


def print_generated(output_file: str, duration: Optional[float] = None):
    """Print generation complete message."""
    suffix = f" [dim]({format_duration(duration)})[/dim]" if duration is not None else ""
    console.print(f"  [green]+[/green] Wrote {output_file}{suffix}")


def print_materials(names: Iterable[str]):
    console.print()
    for name in names:
        console.print(f"  {name}")
    console.print()


def show_help():
    """Display help page with rich formatting."""
    console.print()
    console.print(
        "  [bold]moldgate[/bold] [dim]- injection gate placement and sizing from STL[/dim]"
    )
    console.print()

    console.print("  [dim]Quick Start[/dim]")
    console.print(
        "    moldgate part.stl -m PP -H 2          [dim]gate nearest the centre of mass[/dim]"
    )
    console.print(
        "    moldgate part.stl -m ABS:4 -H 3 -a    [dim]aesthetic gate on the parting line[/dim]"
    )
    console.print(
        "    moldgate part.stl -m PC -H 2 --ply marked.ply   [dim]export gate marker[/dim]"
    )
    console.print()

    console.print("  [dim]Options[/dim]")
    console.print("    [bold]Material[/bold]")
    console.print("    -m, --material NAME  database row [dim](NAME or NAME:CASE)[/dim]")
    console.print("    --n --t-melt --t-wall --gamma-opt --mu-opt --kappa")
    console.print("                         inline overrides [dim](all six without -m)[/dim]")
    console.print("    --list-materials     list known materials")
    console.print()
    console.print("    [bold]Geometry[/bold]")
    console.print("    -H, --thickness MM   part thickness [dim](required)[/dim]")
    console.print("    -d, --direction X Y Z  demolding direction [dim](0 0 1)[/dim]")
    console.print("    --spacing MM         grid spacing [dim](auto)[/dim]")
    console.print("    --ring-samples M     ring rays per node [dim](16)[/dim]")
    console.print("    --strict             disable the ring depth check")
    console.print("    --depth-tol MM       ring depth tolerance [dim](thickness)[/dim]")
    console.print()
    console.print("    [bold]Gate[/bold]")
    console.print("    -a, --aesthetic      place the gate on the parting line")
    console.print("    --parting-line FILE  parting polyline [dim](x y z per line)[/dim]")
    console.print("    --rect-aspect K      report a rectangular gate, width = K x height")
    console.print()
    console.print("    [bold]Output[/bold]")
    console.print("    -o FILE              report [dim](moldgate-report.json)[/dim]")
    console.print("    --ply FILE           part + gate marker as coloured PLY")
    console.print("    --threads N          worker threads [dim](1)[/dim]")
    console.print("    -q, -v               quiet / verbose")
    console.print()

    console.print("  [dim]Exit codes[/dim]")
    console.print("    0 gate found, 2 no feasible gate (report written), 1 error")
    console.print()

    console.print("  [dim]Tips[/dim]")
    console.print(
        "    Run [bold]moldgate[/bold] without args for interactive mode"
    )
    console.print(
        "    Set [bold]MOLDGATE_MATERIALS[/bold] to a TOML file to add materials"
    )
    console.print()


def print_help_hint():
    """Print hint about help command."""
    console.print("  [dim]Use -h or --help for more options[/dim]")
    console.print()
