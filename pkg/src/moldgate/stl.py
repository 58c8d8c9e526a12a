"""STL reader and writer (ASCII and binary, millimetres)."""

from __future__ import annotations

import logging
import struct

import numpy as np

from .constants import (
    NORMAL_UNIT_TOLERANCE,
    STL_COUNT_SIZE,
    STL_HEADER_SIZE,
    STL_RECORD_SIZE,
)
from .errors import StlParseError
from .mesh import TriangleMesh, facet_cross

logger = logging.getLogger(__name__)

# 12 little-endian float32 (normal + 3 vertices) and a uint16 attribute
BINARY_RECORD = np.dtype([("data", "<f4", (12,)), ("attr", "<u2")])


def _binary_facet_count(raw: bytes) -> int | None:
    if len(raw) < STL_HEADER_SIZE + STL_COUNT_SIZE:
        return None
    return struct.unpack_from("<I", raw, STL_HEADER_SIZE)[0]


def _looks_ascii(raw: bytes) -> bool:
    head = raw[:512].lstrip()
    return head[:5].lower() == b"solid" and b"\x00" not in head


def parse_stl(raw: bytes) -> TriangleMesh:
    """Decode an ASCII or binary STL payload.

    The payload is binary iff its length is exactly 84 + 50 * count, where
    count is the header's facet count; otherwise ASCII keywords are tried.
    """
    count = _binary_facet_count(raw)
    expected = (
        None
        if count is None
        else STL_HEADER_SIZE + STL_COUNT_SIZE + STL_RECORD_SIZE * count
    )

    if expected is not None and len(raw) == expected:
        return _parse_binary(raw, count)  # type: ignore[arg-type]
    if _looks_ascii(raw):
        return _parse_ascii(raw)
    if expected is not None and len(raw) < expected:
        raise StlParseError(
            f"Truncated binary STL: header declares {count} facet(s) "
            f"({expected} bytes) but the file has {len(raw)} bytes"
        )
    if expected is not None:
        raise StlParseError(
            f"Binary STL size mismatch: header declares {count} facet(s) "
            f"({expected} bytes) but the file has {len(raw)} bytes"
        )
    raise StlParseError("Not an STL file: too short for a binary header")


def _parse_binary(raw: bytes, count: int) -> TriangleMesh:
    if count == 0:
        raise StlParseError("STL contains zero facets")

    records = np.frombuffer(
        raw,
        dtype=BINARY_RECORD,
        count=count,
        offset=STL_HEADER_SIZE + STL_COUNT_SIZE,
    )
    data = records["data"].astype(np.float64)
    normals = data[:, 0:3]
    corners = data[:, 3:12].reshape(-1, 3, 3)

    bad = np.flatnonzero(~np.isfinite(corners).all(axis=(1, 2)))
    if len(bad):
        raise StlParseError(f"NaN or infinite coordinate in facet {int(bad[0])}")

    return _assemble(corners, normals)


def _parse_floats(tokens: list[bytes], line_no: int, what: str) -> list[float]:
    if len(tokens) != 3:
        raise StlParseError(f"Line {line_no}: expected 3 numbers after '{what}'")
    try:
        values = [float(t) for t in tokens]
    except ValueError:
        raise StlParseError(f"Line {line_no}: invalid number in '{what}'")
    if what == "vertex" and not all(np.isfinite(values)):
        raise StlParseError(f"Line {line_no}: NaN or infinite coordinate")
    return values


def _parse_ascii(raw: bytes) -> TriangleMesh:
    lines = [
        (number, line.split())
        for number, line in enumerate(raw.splitlines(), start=1)
        if line.strip()
    ]
    normals: list[list[float]] = []
    corners: list[list[float]] = []

    def expect(index: int, keyword: list[bytes]) -> int:
        if index >= len(lines):
            raise StlParseError(
                f"Line {lines[-1][0]}: unexpected end of file, "
                f"expected '{b' '.join(keyword).decode()}'"
            )
        number, tokens = lines[index]
        if [t.lower() for t in tokens] != keyword:
            raise StlParseError(
                f"Line {number}: expected '{b' '.join(keyword).decode()}'"
            )
        return index + 1

    index = 0
    in_solid = False
    while index < len(lines):
        number, tokens = lines[index]
        keyword = tokens[0].lower()

        match keyword:
            case b"solid":
                in_solid = True
                index += 1
            case b"endsolid":
                in_solid = False
                index += 1
            case b"facet" if in_solid:
                if len(tokens) < 2 or tokens[1].lower() != b"normal":
                    raise StlParseError(f"Line {number}: expected 'facet normal'")
                normals.append(_parse_floats(tokens[2:], number, "facet normal"))
                index = expect(index + 1, [b"outer", b"loop"])
                for _ in range(3):
                    if index >= len(lines):
                        raise StlParseError(
                            f"Line {number}: unexpected end of file inside facet"
                        )
                    v_number, v_tokens = lines[index]
                    if v_tokens[0].lower() != b"vertex":
                        raise StlParseError(f"Line {v_number}: expected 'vertex'")
                    corners.append(_parse_floats(v_tokens[1:], v_number, "vertex"))
                    index += 1
                index = expect(index, [b"endloop"])
                index = expect(index, [b"endfacet"])
            case _:
                raise StlParseError(
                    f"Line {number}: unexpected '{tokens[0].decode(errors='replace')}'"
                )

    if not normals:
        raise StlParseError("STL contains zero facets")
    return _assemble(
        np.asarray(corners, dtype=np.float64).reshape(-1, 3, 3),
        np.asarray(normals, dtype=np.float64),
    )


def _assemble(corners: np.ndarray, file_normals: np.ndarray) -> TriangleMesh:
    """Soup mesh in file order; file normals kept only when unit length."""
    vertices = corners.reshape(-1, 3)
    facets = np.arange(len(vertices)).reshape(-1, 3)

    lengths = np.linalg.norm(file_normals, axis=1)
    usable = np.isfinite(lengths) & (np.abs(lengths - 1.0) <= NORMAL_UNIT_TOLERANCE)

    cross = facet_cross(vertices, facets)
    norms = np.linalg.norm(cross, axis=1)
    derived = np.zeros_like(cross)
    nonzero = norms > 0
    derived[nonzero] = cross[nonzero] / norms[nonzero, None]

    replaced = int(np.count_nonzero(~usable))
    if replaced:
        logger.debug("Recomputed %d zero or non-unit file normal(s)", replaced)
    normals = np.where(usable[:, None], file_normals, derived)
    return TriangleMesh(vertices, facets, normals)


def serialize_stl(
    mesh: TriangleMesh, ascii: bool = False, name: str = "moldgate"
) -> bytes:
    """Encode a mesh as binary (default) or ASCII STL."""
    corners = mesh.triangles
    if ascii:
        lines = [f"solid {name}"]
        for normal, triangle in zip(mesh.normals, corners):
            lines.append("  facet normal {:.9g} {:.9g} {:.9g}".format(*normal))
            lines.append("    outer loop")
            for vertex in triangle:
                lines.append("      vertex {:.9g} {:.9g} {:.9g}".format(*vertex))
            lines.append("    endloop")
            lines.append("  endfacet")
        lines.append(f"endsolid {name}")
        return ("\n".join(lines) + "\n").encode("ascii")

    records = np.zeros(mesh.facet_count, dtype=BINARY_RECORD)
    records["data"][:, 0:3] = mesh.normals
    records["data"][:, 3:12] = corners.reshape(-1, 9)
    header = f"binary STL written by {name}".encode("ascii")[:STL_HEADER_SIZE]
    return (
        header.ljust(STL_HEADER_SIZE, b"\0")
        + struct.pack("<I", mesh.facet_count)
        + records.tobytes()
    )
