import json
from dataclasses import replace

import numpy as np
import pytest

from moldgate.errors import ExportError, NoFeasibleGateError, ReportError
from moldgate.gateplan import PlanConfig, plan_gate
from moldgate.materials import MaterialDatabase
from moldgate.report import (
    PLY_FACE,
    PLY_VERTEX,
    ReportMetadata,
    export_marked_geometry,
    icosphere,
    parse_report,
    render_report,
    report_document,
)

from shapes import box, plate

PP = MaterialDatabase.load(environ={}).get("PP")
METADATA = ReportMetadata(
    tool_version="0.1.0",
    input_name="plate.stl",
    input_digest="sha256:00",
    facet_count=12,
    duration=0.25,
)


@pytest.fixture(scope="module")
def plate_plan():
    return plan_gate(plate(), PP, PlanConfig(part_thickness=2, grid_spacing=10))


@pytest.fixture(scope="module")
def infeasible_plan():
    with pytest.raises(NoFeasibleGateError) as info:
        plan_gate(box((0, 0, 0), (2, 2, 5)), PP, PlanConfig(part_thickness=3, grid_spacing=0.5))
    return info.value.plan


def test_plate_report_document(plate_plan):
    document = report_document(plate_plan, METADATA)
    results = document["results"]

    assert document["status"] == "feasible"
    assert document["mode"] == "standard"
    assert document["material"]["name"] == "PP"
    assert results["C_pointfill"] == [50.0, 50.0, 2.0]
    assert results["C_CM"] == [50.0, 50.0, 1.0]
    assert results["R_gate"] == pytest.approx(1.4255, abs=1e-4)
    assert results["chosen_node"] == [5, 5]
    assert results["distance_to_cm"] == 1.0
    assert results["rectangular_gate"] is None
    assert document["nodes"]["total"] == 121
    assert document["input"]["digest"] == "sha256:00"
    assert document["units"]["pressure_drop"] == "MPa"


def test_infeasible_report(infeasible_plan):
    document = report_document(infeasible_plan, METADATA)
    assert document["status"] == "infeasible"
    assert document["results"]["C_pointfill"] is None
    assert document["results"]["pressure_drop"] is None
    assert document["nodes"]["feasible"] == 0
    assert sum(document["nodes"]["rejections"].values()) == document["nodes"]["total"]


def test_rendering_is_canonical(plate_plan):
    first = render_report(plate_plan, METADATA)
    second = render_report(plate_plan, replace(METADATA, duration=9.5))

    assert first.endswith("\n")
    assert json.loads(first)["duration"] == 0.25
    strip = lambda text: [l for l in text.splitlines() if '"duration"' not in l]  # noqa: E731
    assert strip(first) == strip(second)

    rerun = plan_gate(plate(), PP, PlanConfig(part_thickness=2, grid_spacing=10))
    assert render_report(rerun, METADATA) == first


def test_input_block_carries_mesh_validation_counts(plate_plan):
    document = report_document(plate_plan, METADATA)
    assert document["input"]["degenerate_facets"] == 0
    assert document["input"]["duplicate_facets"] == 0

    flagged = replace(METADATA, degenerate_facets=2, duplicate_facets=1)
    document = json.loads(render_report(plate_plan, flagged))
    assert document["input"] == {
        "name": "plate.stl",
        "digest": "sha256:00",
        "facets": 12,
        "degenerate_facets": 2,
        "duplicate_facets": 1,
    }


def test_rendering_refuses_non_finite_numbers(plate_plan):
    with pytest.raises(ValueError):
        render_report(plate_plan, replace(METADATA, duration=float("nan")))


def test_parse_report_round_trip(plate_plan):
    text = render_report(plate_plan, METADATA)
    assert parse_report(text) == json.loads(text)


@pytest.mark.parametrize(
    "text, message",
    [
        ("{not json", "not valid JSON"),
        ("[1, 2]", "JSON object"),
        ('{"schema_version": 99}', "Unsupported report schema_version"),
    ],
)
def test_parse_report_errors(text, message):
    with pytest.raises(ReportError, match=message):
        parse_report(text)


def test_icosphere_facet_counts():
    marker = icosphere((0, 0, 0), 1.0)
    assert marker.facet_count == 80
    assert marker.vertex_count == 42
    assert np.allclose(np.linalg.norm(marker.vertices, axis=1), 1.0)
    assert icosphere((0, 0, 0), 1.0, subdivisions=0).facet_count == 20
    with pytest.raises(ValueError):
        icosphere((0, 0, 0), 0.0)


def test_icosphere_faces_outward():
    marker = icosphere((5, 5, 5), 2.0, subdivisions=2)
    centroids = marker.triangles.mean(axis=1) - 5.0
    assert np.all(np.einsum("ij,ij->i", marker.normals, centroids) > 0)


def _read_ply(data: bytes):
    end = data.index(b"end_header\n") + len(b"end_header\n")
    header = data[:end].decode("ascii").splitlines()
    assert header[0] == "ply"
    assert header[1] == "format binary_little_endian 1.0"
    counts = {
        line.split()[1]: int(line.split()[2])
        for line in header
        if line.startswith("element")
    }
    vertices = np.frombuffer(data, dtype=PLY_VERTEX, count=counts["vertex"], offset=end)
    faces = np.frombuffer(
        data,
        dtype=PLY_FACE,
        count=counts["face"],
        offset=end + counts["vertex"] * PLY_VERTEX.itemsize,
    )
    assert end + vertices.nbytes + faces.nbytes == len(data)
    return header, vertices, faces


def test_marked_geometry_layout(plate_plan):
    mesh = plate()
    header, vertices, faces = _read_ply(export_marked_geometry(mesh, plate_plan))

    assert "property list uchar int vertex_indices" in header
    assert len(faces) == 12 + 80
    assert len(vertices) == mesh.vertex_count + 42
    assert np.all(faces["count"] == 3)
    assert faces["indices"].max() == len(vertices) - 1

    part = vertices[: mesh.vertex_count]
    marker = vertices[mesh.vertex_count :]
    assert set(part["red"]) == {190}
    assert set(marker["red"]) == {220}

    centre = np.column_stack((marker["x"], marker["y"], marker["z"])).mean(axis=0)
    assert np.allclose(centre, plate_plan.gate_point, atol=1e-6)
    radii = np.linalg.norm(
        np.column_stack((marker["x"], marker["y"], marker["z"])) - centre, axis=1
    )
    assert np.allclose(radii, plate_plan.R_gate)


def test_marker_faces_index_marker_vertices(plate_plan):
    mesh = plate()
    _, _, faces = _read_ply(export_marked_geometry(mesh, plate_plan))
    assert faces["indices"][:12].max() < mesh.vertex_count
    assert faces["indices"][12:].min() >= mesh.vertex_count


def test_export_requires_a_gate(infeasible_plan):
    with pytest.raises(ExportError):
        export_marked_geometry(box((0, 0, 0), (2, 2, 5)), infeasible_plan)
