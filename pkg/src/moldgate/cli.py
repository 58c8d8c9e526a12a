"""CLI argument parsing for moldgate."""

import argparse
import sys

from .constants import DEFAULT_REPORT_NAME, DEFAULT_RING_SAMPLES
from .output import show_help
from .utils import (
    aspect_ratio,
    non_negative_float,
    positive_float,
    ring_count,
    thread_count,
)


class RichHelpAction(argparse.Action):
    """-h/--help anywhere on the command line: rich help on stderr, exit 0."""

    def __init__(
        self,
        option_strings,
        dest=argparse.SUPPRESS,
        default=argparse.SUPPRESS,
        help=None,
    ):
        super().__init__(
            option_strings=option_strings,
            dest=dest,
            default=default,
            nargs=0,
            help=help,
        )

    def __call__(self, parser, namespace, values, option_string=None):
        show_help()
        parser.exit(0)


class MoldgateArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that exits with 1; exit code 2 means "no feasible gate"."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def create_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser."""
    parser = MoldgateArgumentParser(
        prog="moldgate",
        description="Place and size an injection gate on an STL part",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        add_help=False,
    )

    parser.add_argument(
        "-h",
        "--help",
        action=RichHelpAction,
        help="Show this help and exit",
    )
    parser.add_argument(
        "input",
        nargs="?",
        help="Input STL file (binary or ASCII)",
    )

    # Material
    material_group = parser.add_argument_group("Material")
    material_group.add_argument(
        "-m",
        "--material",
        metavar="NAME",
        help="Material database row, NAME or NAME:CASE",
    )
    for flag, field, help_text in (
        ("--n", "n", "Power-law index n"),
        ("--t-melt", "T_melt", "Melt temperature (degC)"),
        ("--t-wall", "T_wall", "Mold wall temperature (degC)"),
        ("--gamma-opt", "gamma_opt", "Optimal shear rate (1/s)"),
        ("--mu-opt", "mu_opt", "Optimal viscosity (Pa.s)"),
        ("--kappa", "kappa", "Thermal conductivity (W/(m.degC))"),
    ):
        material_group.add_argument(
            flag,
            type=float,
            dest=field,
            metavar="VALUE",
            help=help_text,
        )
    material_group.add_argument(
        "--list-materials",
        action="store_true",
        help="List known materials and exit",
    )

    # Geometry
    geometry_group = parser.add_argument_group("Geometry")
    geometry_group.add_argument(
        "-H",
        "--thickness",
        type=positive_float,
        metavar="MM",
        help="Part thickness H (required)",
    )
    geometry_group.add_argument(
        "-d",
        "--direction",
        nargs=3,
        default=["0", "0", "1"],
        metavar=("X", "Y", "Z"),
        help="Demolding direction",
    )
    geometry_group.add_argument(
        "--spacing",
        type=positive_float,
        metavar="MM",
        help="Grid spacing (default: derived from the mesh)",
    )
    geometry_group.add_argument(
        "--ring-samples",
        type=ring_count,
        default=DEFAULT_RING_SAMPLES,
        metavar="M",
        help="Ring rays per node",
    )
    geometry_group.add_argument(
        "--strict",
        action="store_true",
        help="Disable the ring depth-coherence check",
    )
    geometry_group.add_argument(
        "--depth-tol",
        type=non_negative_float,
        metavar="MM",
        help="Ring depth-coherence tolerance (default: thickness)",
    )

    # Gate
    gate_group = parser.add_argument_group("Gate")
    gate_group.add_argument(
        "-a",
        "--aesthetic",
        action="store_true",
        help="Place the gate on the parting line",
    )
    gate_group.add_argument(
        "--parting-line",
        metavar="FILE",
        help="Parting polyline, one 'x y z' per line",
    )
    gate_group.add_argument(
        "--rect-aspect",
        type=aspect_ratio,
        metavar="K",
        help="Also size a rectangular gate with width = K x height",
    )

    # Output
    output_group = parser.add_argument_group("Output")
    output_group.add_argument(
        "-o",
        "--output",
        default=DEFAULT_REPORT_NAME,
        help="Report file name",
    )
    output_group.add_argument(
        "--ply",
        metavar="FILE",
        help="Write the part with a gate marker as PLY",
    )
    output_group.add_argument(
        "--threads",
        type=thread_count,
        default=1,
        metavar="N",
        help="Worker threads for node evaluation",
    )
    output_group.add_argument(
        "-q",
        "--quiet",
        action="store_true",
        help="Suppress progress messages",
    )
    output_group.add_argument(
        "-v",
        "--verbose",
        action="store_true",
        help="Show debug logging",
    )

    return parser
