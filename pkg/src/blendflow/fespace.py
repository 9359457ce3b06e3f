"""Scalar and vector Lagrange spaces (P1/P2) on triangle meshes.

Degrees of freedom are the vertex values (P1) plus edge-midpoint values
(P2).  Vector spaces stack the two components block-wise: dofs [0, n) are
the x-component, [n, 2n) the y-component of the same scalar layout, which
lets every vector operator be built from scalar blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp

from .mesh import BoundaryTag, Mesh
from .solvers import LinearSystem

Coefficients = np.ndarray  # dense vector of dof values for one field


@dataclass
class FunctionSpace:
    """Lagrange space of given degree with 1 (scalar) or 2 (vector) components."""

    mesh: Mesh
    degree: int
    components: int
    edges: np.ndarray  # (ne, 2) sorted vertex pairs, first-seen order
    edge_index: dict  # (min, max) vertex pair -> edge number
    cell_dofs: np.ndarray  # (nt, nloc) scalar local-to-global map
    n_scalar: int
    dof_coords: np.ndarray  # (n_scalar, 2) nodal coordinates

    @property
    def ndofs(self) -> int:
        return self.components * self.n_scalar

    @property
    def n_local(self) -> int:
        return self.cell_dofs.shape[1]

    def component_dofs(self, dofs: np.ndarray, component: int) -> np.ndarray:
        """Global dof numbers of one vector component for scalar dof numbers."""
        return dofs + component * self.n_scalar


def _enumerate_edges(mesh: Mesh):
    index: dict = {}
    edges = []
    for a, b, c in mesh.triangles:
        for u, v in ((a, b), (b, c), (c, a)):
            key = (u, v) if u < v else (v, u)
            if key not in index:
                index[key] = len(edges)
                edges.append(key)
    return np.array(edges, dtype=np.int64), index


def build_space(mesh: Mesh, degree: int, components: int) -> FunctionSpace:
    """Construct a P1 or P2 Lagrange space; P2 adds one dof per mesh edge."""
    if degree not in (1, 2):
        raise ValueError(f"unsupported polynomial degree {degree}")
    if components not in (1, 2):
        raise ValueError(f"unsupported component count {components}")
    edges, edge_index = _enumerate_edges(mesh)
    nv = mesh.n_vertices
    if degree == 1:
        cell_dofs = mesh.triangles.copy()
        coords = mesh.vertices.copy()
    else:
        nt = mesh.n_triangles
        cell_dofs = np.empty((nt, 6), dtype=np.int64)
        cell_dofs[:, :3] = mesh.triangles
        for t, (a, b, c) in enumerate(mesh.triangles):
            for k, (u, v) in enumerate(((a, b), (b, c), (c, a))):
                key = (u, v) if u < v else (v, u)
                cell_dofs[t, 3 + k] = nv + edge_index[key]
        midpoints = 0.5 * (mesh.vertices[edges[:, 0]] + mesh.vertices[edges[:, 1]])
        coords = np.vstack([mesh.vertices, midpoints])
    coords.flags.writeable = False
    cell_dofs.flags.writeable = False
    return FunctionSpace(
        mesh=mesh,
        degree=degree,
        components=components,
        edges=edges,
        edge_index=edge_index,
        cell_dofs=cell_dofs,
        n_scalar=coords.shape[0],
        dof_coords=coords,
    )


def interpolate(space: FunctionSpace, f) -> Coefficients:
    """Nodal interpolant of f(x, y); vector spaces expect f to return (fx, fy).

    f must accept numpy arrays.  Raises on non-finite values.
    """
    x, y = space.dof_coords[:, 0], space.dof_coords[:, 1]
    if space.components == 1:
        vals = np.broadcast_to(np.asarray(f(x, y), dtype=float), x.shape).copy()
    else:
        fx, fy = f(x, y)
        vals = np.concatenate(
            [
                np.broadcast_to(np.asarray(fx, dtype=float), x.shape),
                np.broadcast_to(np.asarray(fy, dtype=float), x.shape),
            ]
        )
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("interpolated function takes non-finite values")
    return vals


def l2_norm(space: FunctionSpace, coeffs: Coefficients, mass: sp.spmatrix) -> float:
    """Discrete L2 norm sqrt(c^T M c)."""
    if coeffs.shape[0] != space.ndofs or mass.shape != (space.ndofs, space.ndofs):
        raise ValueError(
            f"dimension mismatch: coeffs {coeffs.shape}, mass {mass.shape}, "
            f"space has {space.ndofs} dofs"
        )
    val = float(coeffs @ (mass @ coeffs))
    return np.sqrt(max(val, 0.0))


class DirichletBC:
    """Essential values on a set of dofs: constants or callables of (x, y, t)."""

    def __init__(self, space: FunctionSpace, dofs: np.ndarray, value):
        self.space = space
        self.dofs = np.asarray(dofs, dtype=np.int64)
        if self.dofs.size and (
            self.dofs.min() < 0 or self.dofs.max() >= space.ndofs
        ):
            raise IndexError(
                f"dof indices outside space of size {space.ndofs}: "
                f"[{self.dofs.min()}, {self.dofs.max()}]"
            )
        self._value = value
        self._constant = None if callable(value) else self._resolve(0.0)

    def _resolve(self, t: float) -> np.ndarray:
        coords = np.tile(self.space.dof_coords, (self.space.components, 1))
        x, y = coords[self.dofs, 0], coords[self.dofs, 1]
        if callable(self._value):
            if self.space.components == 1:
                return np.broadcast_to(
                    np.asarray(self._value(x, y, t), dtype=float), x.shape
                ).copy()
            vx, vy = self._value(x, y, t)
            out = np.empty(self.dofs.shape[0])
            is_y = self.dofs >= self.space.n_scalar
            out[~is_y] = np.broadcast_to(np.asarray(vx, float), x.shape)[~is_y]
            out[is_y] = np.broadcast_to(np.asarray(vy, float), x.shape)[is_y]
            return out
        if self.space.components == 2 and isinstance(self._value, (tuple, list)):
            vx, vy = float(self._value[0]), float(self._value[1])
            return np.where(self.dofs < self.space.n_scalar, vx, vy)
        return np.full(self.dofs.shape[0], float(self._value))

    def values(self, t: float = 0.0) -> np.ndarray:
        if self._constant is not None:
            return self._constant
        return self._resolve(t)


def boundary_scalar_dofs(
    space: FunctionSpace,
    tags: Sequence[BoundaryTag] | None = None,
    sides: Sequence[str] | None = None,
) -> np.ndarray:
    """Sorted scalar dof numbers on boundary edges, filtered by tag and/or side."""
    from .mesh import edge_side

    tagset = None if tags is None else set(tags)
    sideset = None if sides is None else set(sides)
    mesh = space.mesh
    nv = mesh.n_vertices
    dofs = set()
    for edge, tag in zip(mesh.boundary_edges, mesh.boundary_tags):
        if tagset is not None and tag not in tagset:
            continue
        if sideset is not None and edge_side(mesh, edge) not in sideset:
            continue
        a, b = int(edge[0]), int(edge[1])
        dofs.add(a)
        dofs.add(b)
        if space.degree == 2:
            key = (a, b) if a < b else (b, a)
            dofs.add(nv + space.edge_index[key])
    return np.array(sorted(dofs), dtype=np.int64)


def dirichlet_bc(space: FunctionSpace, tags: Sequence[BoundaryTag], value) -> DirichletBC:
    """Essential condition on all dofs of the tagged boundary segments.

    For vector spaces both components of each boundary node are constrained;
    `value` is then a (vx, vy) pair or a callable returning one.
    """
    scalar = boundary_scalar_dofs(space, tags)
    if space.components == 1:
        dofs = scalar
    else:
        dofs = np.concatenate([scalar, scalar + space.n_scalar])
    return DirichletBC(space, dofs, value)


def apply_dirichlet(
    system: LinearSystem,
    bcs: DirichletBC | Sequence[DirichletBC],
    t: float = 0.0,
) -> LinearSystem:
    """Impose essential values by row/column elimination.

    Constrained rows become identity rows with the prescribed value on the
    right-hand side; the matching columns are folded into the RHS so the
    remaining block keeps its symmetry.  Idempotent.  Constrained dofs must
    index the leading block of the system (velocity-first layout).
    """
    if isinstance(bcs, DirichletBC):
        bcs = [bcs]
    n = system.A.shape[0]
    g = np.zeros(n)
    fixed = np.zeros(n, dtype=bool)
    for bc in bcs:
        if len(bc.dofs) and bc.dofs.max() >= n:
            raise IndexError(
                f"constrained dof {int(bc.dofs.max())} outside system of size {n}"
            )
        g[bc.dofs] = bc.values(t)
        fixed[bc.dofs] = True
    if not fixed.any():
        return system
    keep = (~fixed).astype(float)
    Dk = sp.diags(keep)
    Df = sp.diags(fixed.astype(float))
    A2 = (Dk @ system.A @ Dk + Df).tocsr()
    b2 = keep * (system.b - system.A @ g) + g
    return LinearSystem(A2, b2)
