"""Minimal interactive mode for moldgate."""

import os
import sys

from .materials import MaterialDatabase
from .output import console


def clear_lines(n: int = 1):
    """Clear n lines above cursor."""
    for _ in range(n):
        sys.stderr.write("\033[F")
        sys.stderr.write("\033[K")
    sys.stderr.flush()


def _stl_files(directory: str) -> list[str]:
    try:
        names = os.listdir(directory)
    except OSError:
        return []
    return sorted(n for n in names if n.lower().endswith(".stl"))


def interactive_mode() -> list[str]:
    """Prompt for STL, material, thickness and mode; return CLI args."""
    from InquirerPy import inquirer  # type: ignore

    args: list[str] = []

    # 1. Input file
    found = _stl_files(os.getcwd())
    console.print("[dim]path to a binary or ASCII STL[/dim]")
    path = inquirer.text(  # type: ignore
        message="STL file",
        default=found[0] if found else "",
    ).execute()
    clear_lines(2)
    path = path.strip()
    if not path:
        return []
    args.append(path)

    # 2. Material
    names = MaterialDatabase.load().names
    console.print("[dim]arrows: navigate | enter: confirm[/dim]")
    material = inquirer.select(  # type: ignore
        message="Material",
        choices=[{"name": name, "value": name} for name in names],
        default=names[0] if names else None,
        pointer=">",
    ).execute()
    clear_lines(2)
    args.extend(["-m", material])

    # 3. Thickness
    console.print("[dim]part thickness H in mm[/dim]")
    thickness = inquirer.text(  # type: ignore
        message="Thickness",
        default="2",
    ).execute()
    clear_lines(2)
    args.extend(["-H", thickness.strip()])

    # 4. Mode
    console.print("[dim]arrows: navigate | enter: confirm[/dim]")
    aesthetic = inquirer.select(  # type: ignore
        message="Gate",
        choices=[
            {"name": "nearest centre of mass", "value": False},
            {"name": "on parting line (aesthetic)", "value": True},
        ],
        default=False,
        pointer=">",
    ).execute()
    clear_lines(2)
    if aesthetic:
        args.append("-a")

    # 5. Marked geometry
    console.print("[dim]PLY path | leave blank for none[/dim]")
    ply = inquirer.text(  # type: ignore
        message="Marked PLY",
        default="",
    ).execute()
    clear_lines(2)
    if ply.strip():
        args.extend(["--ply", ply.strip()])

    cmd = "moldgate " + " ".join(args)
    console.print(f"  [dim]>[/dim] {cmd}")
    console.print()

    return args
