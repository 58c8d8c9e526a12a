"""Utility functions for moldgate."""

import argparse
import hashlib
import math
from typing import Tuple


def format_size(size_bytes: int) -> str:
    """Format file size in human-readable format."""
    size: float = float(size_bytes)
    for unit in ["B", "KB", "MB", "GB"]:
        if size < 1024:
            return (
                f"{size:.1f} {unit}" if unit != "B" else f"{int(size)} {unit}"
            )
        size /= 1024
    return f"{size:.1f} TB"


def format_duration(seconds: float) -> str:
    """Milliseconds below one second, seconds otherwise."""
    if seconds < 1:
        return f"{seconds * 1000:.0f} ms"
    return f"{seconds:.2f} s"


def file_digest(data: bytes) -> str:
    """sha256 of the raw input, as recorded in the report."""
    return "sha256:" + hashlib.sha256(data).hexdigest()


def positive_float(value: str) -> float:
    """argparse type: finite float > 0."""
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid number: {value}")
    if not math.isfinite(number) or number <= 0:
        raise argparse.ArgumentTypeError(f"Must be a positive number: {value}")
    return number


def non_negative_float(value: str) -> float:
    """argparse type: finite float >= 0."""
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid number: {value}")
    if not math.isfinite(number) or number < 0:
        raise argparse.ArgumentTypeError(f"Must be a non-negative number: {value}")
    return number


def aspect_ratio(value: str) -> float:
    """argparse type: finite float >= 1."""
    try:
        number = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid number: {value}")
    if not math.isfinite(number) or number < 1:
        raise argparse.ArgumentTypeError(f"Aspect must be >= 1: {value}")
    return number


def ring_count(value: str) -> int:
    """argparse type: integer ring sample count >= 8."""
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid integer: {value}")
    if number < 8:
        raise argparse.ArgumentTypeError(f"Ring samples must be >= 8: {value}")
    return number


def thread_count(value: str) -> int:
    """argparse type: worker thread count >= 1."""
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"Invalid integer: {value}")
    if number < 1:
        raise argparse.ArgumentTypeError(f"Thread count must be >= 1: {value}")
    return number


def parse_direction(values) -> Tuple[float, float, float]:
    """Three finite floats, not all zero; returned normalized."""
    if len(values) != 3:
        raise ValueError("Direction needs exactly three components")
    try:
        x, y, z = (float(v) for v in values)
    except ValueError:
        raise ValueError(f"Invalid direction: {' '.join(map(str, values))}")
    norm = math.sqrt(x * x + y * y + z * z)
    if not math.isfinite(norm) or norm == 0:
        raise ValueError(
            f"Invalid direction: {' '.join(map(str, values))} (must be non-zero)"
        )
    return x / norm, y / norm, z / norm
