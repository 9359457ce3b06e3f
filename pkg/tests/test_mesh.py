import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blendflow.mesh import (
    BoundaryTag,
    GeometryError,
    Rect,
    UNIT_SQUARE,
    export_mesh,
    mesh_stats,
    structured_triangulation,
    tag_boundaries,
    triangle_areas,
)


def test_rect_validation():
    with pytest.raises(GeometryError):
        Rect(1.0, 0.0, 0.0, 1.0)
    with pytest.raises(GeometryError):
        Rect(0.0, 1.0, 2.0, 2.0)


@pytest.mark.parametrize(
    "nx,ny,rect,nv,nt",
    [
        (16, 16, UNIT_SQUARE, 289, 512),
        (1, 1, UNIT_SQUARE, 4, 2),
        (10, 20, Rect(0.0, 1.0, 0.0, 2.0), 231, 400),
    ],
)
def test_counting(nx, ny, rect, nv, nt):
    mesh = structured_triangulation(nx, ny, rect)
    assert mesh.n_vertices == nv
    assert mesh.n_triangles == nt


@pytest.mark.parametrize(
    "nx,ny,rect,h_expected",
    [
        (16, 16, UNIT_SQUARE, math.sqrt(2.0) / 16.0),
        (1, 1, UNIT_SQUARE, math.sqrt(2.0)),
        (10, 20, Rect(0.0, 1.0, 0.0, 2.0), math.sqrt(2.0) / 10.0),
    ],
)
def test_h_max(nx, ny, rect, h_expected):
    stats = mesh_stats(structured_triangulation(nx, ny, rect))
    assert stats.h_max == pytest.approx(h_expected, rel=1e-14)
    assert stats.min_angle > 0.0


def test_positive_areas_and_total(mesh16):
    areas = triangle_areas(mesh16)
    assert np.all(areas > 0.0)
    assert abs(areas.sum() - 1.0) <= 1e-12


@given(
    nx=st.integers(min_value=1, max_value=9),
    ny=st.integers(min_value=1, max_value=9),
    w=st.floats(min_value=0.1, max_value=10.0, allow_nan=False),
    h=st.floats(min_value=0.1, max_value=10.0, allow_nan=False),
)
@settings(max_examples=30, deadline=None)
def test_area_and_counts_property(nx, ny, w, h):
    rect = Rect(0.0, w, 0.0, h)
    mesh = structured_triangulation(nx, ny, rect)
    assert mesh.n_vertices == (nx + 1) * (ny + 1)
    assert mesh.n_triangles == 2 * nx * ny
    assert triangle_areas(mesh).sum() == pytest.approx(rect.area, rel=1e-12)


def test_conforming_edge_sharing(mesh8):
    counts = {}
    for tri in mesh8.triangles:
        for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (min(u, v), max(u, v))
            counts[key] = counts.get(key, 0) + 1
    boundary = {
        (min(a, b), max(a, b)) for a, b in map(tuple, mesh8.boundary_edges)
    }
    for key, count in counts.items():
        assert count == (1 if key in boundary else 2)
    assert boundary <= set(counts)


def test_deterministic_rebuild():
    a = structured_triangulation(7, 3, Rect(0.0, 2.0, -1.0, 1.0))
    b = structured_triangulation(7, 3, Rect(0.0, 2.0, -1.0, 1.0))
    assert np.array_equal(a.vertices, b.vertices)
    assert np.array_equal(a.triangles, b.triangles)
    assert np.array_equal(a.boundary_edges, b.boundary_edges)


def test_tagging_all_walls(mesh4):
    assert all(t is BoundaryTag.WALL for t in mesh4.boundary_tags)
    assert len(mesh4.boundary_tags) == 16


def test_tagging_cavity_split():
    nx, ny = 5, 3
    mesh = structured_triangulation(nx, ny)
    tagged = tag_boundaries(
        mesh,
        {
            "left": BoundaryTag.ESSENTIAL,
            "right": BoundaryTag.ESSENTIAL,
            "top": BoundaryTag.NATURAL,
            "bottom": BoundaryTag.NATURAL,
        },
    )
    n_ess = sum(1 for t in tagged.boundary_tags if t is BoundaryTag.ESSENTIAL)
    n_nat = sum(1 for t in tagged.boundary_tags if t is BoundaryTag.NATURAL)
    assert n_ess == 2 * ny
    assert n_nat == 2 * nx


def test_tagging_empty_spec_rejected(mesh4):
    with pytest.raises(GeometryError):
        tag_boundaries(mesh4, {})


def test_tagging_unknown_side_rejected(mesh4):
    with pytest.raises(GeometryError):
        tag_boundaries(mesh4, {"north": BoundaryTag.WALL})


def test_export_roundtrip(tmp_path, mesh4):
    path = tmp_path / "mesh.txt"
    export_mesh(mesh4, path)
    lines = path.read_text().splitlines()
    nv, nt = map(int, lines[0].split())
    assert (nv, nt) == (mesh4.n_vertices, mesh4.n_triangles)
    verts = np.array([[float(v) for v in l.split()] for l in lines[1 : 1 + nv]])
    tris = np.array([[int(v) for v in l.split()] for l in lines[1 + nv :]])
    assert np.array_equal(verts, mesh4.vertices)
    assert np.array_equal(tris, mesh4.triangles)
