"""Structured conforming triangulations of axis-aligned rectangles.

Every cell of an nx-by-ny grid is split along its bottom-left to top-right
diagonal, which keeps the construction deterministic and the triangle
orientation uniformly counterclockwise.  Boundary edges carry a tag that
downstream modules use to decide between essential and natural conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, NamedTuple

import numpy as np


class GeometryError(ValueError):
    """Inconsistent geometric input (degenerate rectangle, edge off-side, ...)."""


class BoundaryTag(Enum):
    """Role of a boundary segment.

    WALL: essential everywhere (no-slip velocity, prescribed scalars).
    ESSENTIAL: prescribed scalar values (velocity is still no-slip here).
    NATURAL: zero-flux scalar segment; contributes nothing to assembly.
    """

    WALL = "wall"
    ESSENTIAL = "essential"
    NATURAL = "natural"


SIDES = ("left", "right", "bottom", "top")


@dataclass(frozen=True)
class Rect:
    """Axis-aligned rectangle (x0, x1) x (y0, y1)."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise GeometryError(f"degenerate rectangle: {self}")

    @property
    def width(self) -> float:
        return self.x1 - self.x0

    @property
    def height(self) -> float:
        return self.y1 - self.y0

    @property
    def area(self) -> float:
        return self.width * self.height


UNIT_SQUARE = Rect(0.0, 1.0, 0.0, 1.0)


@dataclass
class Mesh:
    """Conforming triangulation with tagged boundary edges.

    vertices: (nv, 2) float array.
    triangles: (nt, 3) int array, counterclockwise vertex triples.
    boundary_edges: (nb, 2) int array of vertex pairs on the boundary.
    boundary_tags: one BoundaryTag per boundary edge.
    rect: the generating rectangle (used for side lookup and domain constants).
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    boundary_tags: list[BoundaryTag]
    rect: Rect
    nx: int = 0
    ny: int = 0

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]


class MeshStats(NamedTuple):
    n_vertices: int
    n_triangles: int
    h_max: float
    min_angle: float


def _freeze(*arrays: np.ndarray) -> None:
    for a in arrays:
        a.flags.writeable = False


def structured_triangulation(nx: int, ny: int, rect: Rect = UNIT_SQUARE) -> Mesh:
    """Triangulate `rect` with an nx-by-ny grid of cells, two triangles each.

    Vertices are numbered row-major (x fastest).  All boundary edges start
    out tagged WALL; retag with `tag_boundaries`.
    """
    if nx < 1 or ny < 1:
        raise ValueError(f"need nx, ny >= 1, got ({nx}, {ny})")
    xs = np.linspace(rect.x0, rect.x1, nx + 1)
    ys = np.linspace(rect.y0, rect.y1, ny + 1)
    X, Y = np.meshgrid(xs, ys)  # shape (ny+1, nx+1)
    vertices = np.column_stack([X.ravel(), Y.ravel()])

    def vid(ix: int, iy: int) -> int:
        return iy * (nx + 1) + ix

    triangles = np.empty((2 * nx * ny, 3), dtype=np.int64)
    k = 0
    for iy in range(ny):
        for ix in range(nx):
            v00 = vid(ix, iy)
            v10 = vid(ix + 1, iy)
            v01 = vid(ix, iy + 1)
            v11 = vid(ix + 1, iy + 1)
            # split along the v00-v11 diagonal, both triangles CCW
            triangles[k] = (v00, v10, v11)
            triangles[k + 1] = (v00, v11, v01)
            k += 2

    edges = []
    for ix in range(nx):  # bottom, then top
        edges.append((vid(ix, 0), vid(ix + 1, 0)))
    for ix in range(nx):
        edges.append((vid(ix, ny), vid(ix + 1, ny)))
    for iy in range(ny):  # left, then right
        edges.append((vid(0, iy), vid(0, iy + 1)))
    for iy in range(ny):
        edges.append((vid(nx, iy), vid(nx, iy + 1)))
    boundary_edges = np.array(edges, dtype=np.int64)

    _freeze(vertices, triangles, boundary_edges)
    return Mesh(
        vertices=vertices,
        triangles=triangles,
        boundary_edges=boundary_edges,
        boundary_tags=[BoundaryTag.WALL] * len(edges),
        rect=rect,
        nx=nx,
        ny=ny,
    )


def edge_side(mesh: Mesh, edge: np.ndarray) -> str:
    """Name of the rectangle side an edge lies on ('left', 'right', ...)."""
    rect = mesh.rect
    tol = 1e-12 * max(rect.width, rect.height)
    p, q = mesh.vertices[edge[0]], mesh.vertices[edge[1]]
    if abs(p[0] - rect.x0) <= tol and abs(q[0] - rect.x0) <= tol:
        return "left"
    if abs(p[0] - rect.x1) <= tol and abs(q[0] - rect.x1) <= tol:
        return "right"
    if abs(p[1] - rect.y0) <= tol and abs(q[1] - rect.y0) <= tol:
        return "bottom"
    if abs(p[1] - rect.y1) <= tol and abs(q[1] - rect.y1) <= tol:
        return "top"
    raise GeometryError(f"boundary edge {edge} lies on no rectangle side")


def tag_boundaries(mesh: Mesh, spec: Mapping[str, BoundaryTag]) -> Mesh:
    """Return a copy of `mesh` with boundary edges tagged per side.

    `spec` must cover every side that owns at least one boundary edge.
    """
    unknown = set(spec) - set(SIDES)
    if unknown:
        raise GeometryError(f"unknown sides in tag spec: {sorted(unknown)}")
    tags = []
    for edge in mesh.boundary_edges:
        side = edge_side(mesh, edge)
        if side not in spec:
            raise GeometryError(f"no tag given for side '{side}'")
        tags.append(spec[side])
    return Mesh(
        vertices=mesh.vertices,
        triangles=mesh.triangles,
        boundary_edges=mesh.boundary_edges,
        boundary_tags=tags,
        rect=mesh.rect,
        nx=mesh.nx,
        ny=mesh.ny,
    )


def triangle_areas(mesh: Mesh) -> np.ndarray:
    """Signed areas; positive for the CCW triangles produced here."""
    p = mesh.vertices[mesh.triangles]
    d1 = p[:, 1] - p[:, 0]
    d2 = p[:, 2] - p[:, 0]
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


def mesh_stats(mesh: Mesh) -> MeshStats:
    """Vertex/triangle counts, longest edge and smallest corner angle."""
    p = mesh.vertices[mesh.triangles]
    h_max = 0.0
    min_angle = math.pi
    sides = (p[:, 1] - p[:, 0], p[:, 2] - p[:, 1], p[:, 0] - p[:, 2])
    lengths = [np.hypot(s[:, 0], s[:, 1]) for s in sides]
    h_max = float(max(l.max() for l in lengths))
    for i in range(3):
        a = sides[i]
        b = -sides[(i + 2) % 3]
        cosang = np.einsum("ij,ij->i", a, b) / (lengths[i] * lengths[(i + 2) % 3])
        min_angle = min(min_angle, float(np.arccos(np.clip(cosang, -1.0, 1.0)).min()))
    return MeshStats(mesh.n_vertices, mesh.n_triangles, h_max, min_angle)


def export_mesh(mesh: Mesh, path) -> None:
    """Plain-text export: 'nv nt' header, vertex 'x y' lines, 0-based 'i j k' lines."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{mesh.n_vertices} {mesh.n_triangles}\n")
        for x, y in mesh.vertices:
            fh.write(f"{float(x)!r} {float(y)!r}\n")
        for i, j, k in mesh.triangles:
            fh.write(f"{i} {j} {k}\n")
