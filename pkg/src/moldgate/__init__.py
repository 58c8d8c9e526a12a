"""
moldgate - Injection gate placement and sizing for triangulated parts.
"""

import argparse
import os
import sys
import time
from dataclasses import replace
from typing import Optional

from rich.progress import BarColumn, Progress, SpinnerColumn, TextColumn

from .cli import create_parser
from .constants import MATERIAL_FIELDS
from .errors import MoldgateError, NoFeasibleGateError
from .gateplan import GatePlan, PlanConfig, plan_gate
from .materials import MaterialDatabase, resolve_material
from .mesh import TriangleMesh, validate_mesh
from .output import (
    configure_logging,
    console,
    print_error,
    print_generated,
    print_help_hint,
    print_loaded,
    print_material,
    print_materials,
    print_plan,
    print_rectangular,
    show_help,
)
from .interactive import interactive_mode
from .parting import load_parting_line
from .report import ReportMetadata, export_marked_geometry, render_report
from .rheology import size_gate
from .stl import parse_stl
from .utils import file_digest, parse_direction

__version__ = "0.1.0"

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


def main() -> int:
    """Main entry point."""
    # Custom help handling
    if len(sys.argv) == 2 and sys.argv[1] in ["-h", "--help", "-help"]:
        show_help()
        return EXIT_OK

    # Interactive mode if no arguments
    if len(sys.argv) == 1:
        try:
            args_list = interactive_mode()
            if not args_list:
                return EXIT_OK
            sys.argv = ["moldgate"] + args_list
        except KeyboardInterrupt:
            console.print("\n  [dim]Cancelled[/dim]")
            return EXIT_OK

    parser = create_parser()
    try:
        args = parser.parse_args()
    except SystemExit as e:
        return int(e.code or 0)
    return run(args)


def _build_config(args: argparse.Namespace) -> PlanConfig:
    parting_line = None
    if args.parting_line:
        if not os.path.isfile(args.parting_line):
            raise MoldgateError(f"Parting-line file not found: {args.parting_line}")
        points = load_parting_line(args.parting_line)
        parting_line = tuple(tuple(float(c) for c in p) for p in points)

    return PlanConfig(
        part_thickness=args.thickness,
        demold_dir=parse_direction(args.direction),
        grid_spacing=args.spacing,
        ring_samples=args.ring_samples,
        aesthetic=args.aesthetic or parting_line is not None,
        depth_coherence_tol=args.depth_tol,
        depth_check=not args.strict,
        rect_aspect=args.rect_aspect,
        parting_line=parting_line,
    )


def _plan_with_progress(
    mesh: TriangleMesh, material, config: PlanConfig, threads: int, quiet: bool
) -> GatePlan:
    if quiet:
        return plan_gate(mesh, material, config, workers=threads)

    with Progress(
        SpinnerColumn(),
        TextColumn("[dim]{task.description}[/dim]"),
        BarColumn(bar_width=20),
        TextColumn("[dim]{task.percentage:>3.0f}%[/dim]"),
        transient=True,
        console=console,
    ) as progress:
        task = progress.add_task("Projecting", total=None)

        def advance(done: int, total: int):
            progress.update(task, completed=done, total=total)

        return plan_gate(mesh, material, config, workers=threads, progress=advance)


def _write_report(
    args: argparse.Namespace, plan: GatePlan, metadata: ReportMetadata
) -> None:
    with open(args.output, "w", encoding="utf-8", newline="\n") as f:
        f.write(render_report(plan, metadata))
    # stdout carries only the report path
    print(args.output)


def run(args: argparse.Namespace) -> int:
    """Run the pipeline for parsed arguments; returns the exit code."""
    configure_logging(verbose=args.verbose, quiet=args.quiet)
    quiet = args.quiet

    try:
        database = MaterialDatabase.load()
    except MoldgateError as e:
        print_error(str(e))
        return EXIT_ERROR

    if args.list_materials:
        print_materials(database.names)
        return EXIT_OK

    if not args.input:
        print_error("No input STL given")
        if not quiet:
            print_help_hint()
        return EXIT_ERROR
    if args.thickness is None:
        print_error("--thickness is required")
        return EXIT_ERROR
    if not os.path.isfile(args.input):
        print_error(f"File not found: {args.input}")
        return EXIT_ERROR

    started = time.perf_counter()
    try:
        overrides = {name: getattr(args, name) for name in MATERIAL_FIELDS}
        material = resolve_material(database, args.material, overrides)
        config = _build_config(args)

        with open(args.input, "rb") as f:
            raw = f.read()
        mesh = parse_stl(raw)
        validation = validate_mesh(mesh)

        if not quiet:
            print_loaded(args.input, len(raw), mesh.facet_count, mesh.vertex_count)
            sizing = size_gate(material, config.rect_aspect)
            print_material(material.name, sizing.R_gate, sizing.v_bar)
            if sizing.rectangular is not None:
                print_rectangular(*sizing.rectangular)

        metadata = ReportMetadata(
            tool_version=__version__,
            input_name=os.path.basename(args.input),
            input_digest=file_digest(raw),
            facet_count=mesh.facet_count,
            degenerate_facets=len(validation.degenerate_facets),
            duplicate_facets=validation.duplicate_facets,
            parting_line_file=(
                os.path.basename(args.parting_line) if args.parting_line else None
            ),
        )
        plan: Optional[GatePlan] = None
        try:
            plan = _plan_with_progress(mesh, material, config, args.threads, quiet)
        except NoFeasibleGateError as e:
            if e.plan is not None:
                _write_report(args, e.plan, _finished(metadata, started))
                if not quiet:
                    print_plan(e.plan)
            print_error(str(e))
            return EXIT_INFEASIBLE

        _write_report(args, plan, _finished(metadata, started))
        if args.ply:
            with open(args.ply, "wb") as f:
                f.write(export_marked_geometry(mesh, plan))

    except (MoldgateError, ValueError) as e:
        print_error(str(e))
        return EXIT_ERROR
    except OSError as e:
        print_error(f"{e.filename or args.input}: {e.strerror}")
        return EXIT_ERROR

    if not quiet:
        print_plan(plan)
        print_generated(args.output, time.perf_counter() - started)
        if args.ply:
            print_generated(args.ply)

    return EXIT_OK


def _finished(metadata: ReportMetadata, started: float) -> ReportMetadata:
    return replace(metadata, duration=time.perf_counter() - started)


if __name__ == "__main__":
    exit(main())
