"""Assembly of the sparse operators and loads of the weak forms.

All element integrals use one 7-point triangle rule exact for degree 5,
enough for the quadratic-velocity convection integrand, so the discrete
skew symmetry holds to rounding rather than up to a quadrature crime.
Element contributions are accumulated in triangle order (no atomics),
which makes every operator bit-reproducible.

The convection operator is assembled directly in the skew form
    n_ij = 1/2 [ ((w.grad phi_j), phi_i) - ((w.grad phi_i), phi_j) ],
i.e. antisymmetric element-by-element, hence antisymmetric globally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .fespace import Coefficients, FunctionSpace
from .mesh import Mesh


@dataclass(frozen=True)
class QuadratureRule:
    """Barycentric points and weights on the reference triangle.

    Weights sum to the reference area 1/2; physical integrals scale by the
    Jacobian determinant (= twice the triangle area).
    """

    points: np.ndarray  # (nq, 3)
    weights: np.ndarray  # (nq,)
    degree: int


def _degree5_rule() -> QuadratureRule:
    s15 = math.sqrt(15.0)
    a1 = (6.0 + s15) / 21.0
    a2 = (6.0 - s15) / 21.0
    w0 = 9.0 / 40.0
    w1 = (155.0 + s15) / 1200.0
    w2 = (155.0 - s15) / 1200.0
    pts = [(1 / 3, 1 / 3, 1 / 3)]
    wts = [w0]
    for a, w in ((a1, w1), (a2, w2)):
        b = 1.0 - 2.0 * a
        pts += [(b, a, a), (a, b, a), (a, a, b)]
        wts += [w, w, w]
    points = np.array(pts)
    weights = 0.5 * np.array(wts)  # unit-sum weights scaled to reference area
    points.flags.writeable = False
    weights.flags.writeable = False
    return QuadratureRule(points=points, weights=weights, degree=5)


TRI_QUAD_DEG5 = _degree5_rule()

# gradients of the barycentric coordinates w.r.t. reference (xi, eta)
_DLAMBDA = np.array([[-1.0, -1.0], [1.0, 0.0], [0.0, 1.0]])


def _basis_values(degree: int, bary: np.ndarray) -> np.ndarray:
    """(nq, nloc) Lagrange basis values; local order: vertices, then midpoints
    of edges (0,1), (1,2), (2,0) for P2."""
    l0, l1, l2 = bary[:, 0], bary[:, 1], bary[:, 2]
    if degree == 1:
        return np.column_stack([l0, l1, l2])
    return np.column_stack(
        [
            l0 * (2 * l0 - 1),
            l1 * (2 * l1 - 1),
            l2 * (2 * l2 - 1),
            4 * l0 * l1,
            4 * l1 * l2,
            4 * l2 * l0,
        ]
    )


def _basis_ref_grads(degree: int, bary: np.ndarray) -> np.ndarray:
    """(nq, nloc, 2) reference gradients matching `_basis_values` ordering."""
    nq = bary.shape[0]
    if degree == 1:
        return np.broadcast_to(_DLAMBDA, (nq, 3, 2)).copy()
    grads = np.empty((nq, 6, 2))
    for i in range(3):
        grads[:, i, :] = (4 * bary[:, i] - 1)[:, None] * _DLAMBDA[i]
    for k, (i, j) in enumerate(((0, 1), (1, 2), (2, 0))):
        grads[:, 3 + k, :] = 4 * (
            bary[:, j][:, None] * _DLAMBDA[i] + bary[:, i][:, None] * _DLAMBDA[j]
        )
    return grads


def _cell_geometry(mesh: Mesh):
    """Affine map data per triangle: Jacobian inverse and determinant."""
    p = mesh.vertices[mesh.triangles]
    J = np.empty((mesh.n_triangles, 2, 2))
    J[:, :, 0] = p[:, 1] - p[:, 0]
    J[:, :, 1] = p[:, 2] - p[:, 0]
    detJ = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
    invJ = np.empty_like(J)
    invJ[:, 0, 0] = J[:, 1, 1]
    invJ[:, 0, 1] = -J[:, 0, 1]
    invJ[:, 1, 0] = -J[:, 1, 0]
    invJ[:, 1, 1] = J[:, 0, 0]
    invJ /= detJ[:, None, None]
    return J, invJ, detJ


def quadrature_points(mesh: Mesh, rule: QuadratureRule = TRI_QUAD_DEG5):
    """Physical quadrature coordinates, shape (nt, nq, 2)."""
    p = mesh.vertices[mesh.triangles]
    return np.einsum("qk,tkd->tqd", rule.points, p)


def _physical_grads(space: FunctionSpace, rule: QuadratureRule):
    """(nt, nq, nloc, 2) gradients of the scalar basis on every triangle."""
    _, invJ, detJ = _cell_geometry(space.mesh)
    ref = _basis_ref_grads(space.degree, rule.points)
    # d/dx_k = sum_m (dref/dxi_m) invJ[m, k]
    grads = np.einsum("qim,tmk->tqik", ref, invJ)
    return grads, detJ


def _scatter(space: FunctionSpace, local: np.ndarray, shape=None) -> sp.csr_matrix:
    """Accumulate (nt, nloc, nloc) element matrices into a scalar-block CSR."""
    dofs = space.cell_dofs
    rows = np.repeat(dofs, space.n_local, axis=1).ravel()
    cols = np.tile(dofs, (1, space.n_local)).ravel()
    n = space.n_scalar
    mat = sp.coo_matrix(
        (local.ravel(), (rows, cols)), shape=shape or (n, n)
    )
    return mat.tocsr()


def _as_components(space: FunctionSpace, scalar_block: sp.csr_matrix) -> sp.csr_matrix:
    if space.components == 1:
        return scalar_block
    return sp.block_diag((scalar_block, scalar_block), format="csr")


def assemble_mass(space: FunctionSpace, rule: QuadratureRule = TRI_QUAD_DEG5) -> sp.csr_matrix:
    """Mass matrix (phi_j, phi_i); block-diagonal over components."""
    phi = _basis_values(space.degree, rule.points)
    _, _, detJ = _cell_geometry(space.mesh)
    local = np.einsum("q,qi,qj,t->tij", rule.weights, phi, phi, detJ)
    # floating multiplication order breaks exact symmetry; restore it
    local = 0.5 * (local + local.transpose(0, 2, 1))
    return _as_components(space, _scatter(space, local))


def assemble_stiffness(
    space: FunctionSpace, coefficient: float = 1.0, rule: QuadratureRule = TRI_QUAD_DEG5
) -> sp.csr_matrix:
    """Diffusion matrix coefficient * (grad phi_j, grad phi_i)."""
    if coefficient <= 0.0:
        raise ValueError(f"diffusion coefficient must be positive, got {coefficient}")
    grads, detJ = _physical_grads(space, rule)
    local = coefficient * np.einsum(
        "q,tqik,tqjk,t->tij", rule.weights, grads, grads, detJ
    )
    local = 0.5 * (local + local.transpose(0, 2, 1))
    return _as_components(space, _scatter(space, local))


def assemble_divergence(
    vel_space: FunctionSpace,
    pres_space: FunctionSpace,
    rule: QuadratureRule = TRI_QUAD_DEG5,
) -> sp.csr_matrix:
    """Divergence coupling B with B[q, u] = (div phi_u, psi_q).

    Rows are pressure dofs; columns are velocity dofs in block layout
    (x-components first).
    """
    if vel_space.mesh is not pres_space.mesh:
        raise ValueError("velocity and pressure spaces live on different meshes")
    if vel_space.components != 2:
        raise ValueError("velocity space must have two components")
    psi = _basis_values(pres_space.degree, rule.points)
    grads, detJ = _physical_grads(vel_space, rule)
    n_p, n_u = pres_space.n_scalar, vel_space.ndofs
    blocks = []
    rows = np.repeat(pres_space.cell_dofs, vel_space.n_local, axis=1).ravel()
    for comp in range(2):
        local = np.einsum(
            "q,qi,tqj,t->tij", rule.weights, psi, grads[:, :, :, comp], detJ
        )
        cols = np.tile(
            vel_space.cell_dofs + comp * vel_space.n_scalar,
            (1, pres_space.n_local),
        ).ravel()
        blocks.append(
            sp.coo_matrix((local.ravel(), (rows, cols)), shape=(n_p, n_u))
        )
    return (blocks[0] + blocks[1]).tocsr()


def _advecting_field_at_quadrature(
    advect_space: FunctionSpace, advect: Coefficients, rule: QuadratureRule
) -> np.ndarray:
    """(nt, nq, 2) values of a vector field from its coefficients."""
    if advect_space.components != 2:
        raise ValueError("advecting field must belong to a vector space")
    if advect.shape[0] != advect_space.ndofs:
        raise ValueError(
            f"advecting coefficients have length {advect.shape[0]}, "
            f"space has {advect_space.ndofs} dofs"
        )
    phi = _basis_values(advect_space.degree, rule.points)
    vals = np.empty((advect_space.mesh.n_triangles, rule.points.shape[0], 2))
    for comp in range(2):
        comp_coeffs = advect[advect_space.cell_dofs + comp * advect_space.n_scalar]
        vals[:, :, comp] = np.einsum("ti,qi->tq", comp_coeffs, phi)
    return vals


def assemble_convection_skew(
    space: FunctionSpace,
    advect_space: FunctionSpace,
    advect: Coefficients,
    rule: QuadratureRule = TRI_QUAD_DEG5,
) -> sp.csr_matrix:
    """Skew-symmetric convection operator with frozen advecting field w.

    Works for the scalar transport equations and, block-diagonally, for the
    momentum equation.  N(w) + N(w)^T vanishes exactly because each element
    matrix is antisymmetrized before scattering.
    """
    if space.mesh is not advect_space.mesh:
        raise ValueError("advecting field lives on a different mesh")
    w = _advecting_field_at_quadrature(advect_space, advect, rule)
    phi = _basis_values(space.degree, rule.points)
    grads, detJ = _physical_grads(space, rule)
    wdotgrad = np.einsum("tqc,tqic->tqi", w, grads)
    half = np.einsum("q,qi,tqj,t->tij", rule.weights, phi, wdotgrad, detJ)
    local = 0.5 * (half - half.transpose(0, 2, 1))
    return _as_components(space, _scatter(space, local))


def assemble_buoyancy(
    vel_space: FunctionSpace,
    scalar_space: FunctionSpace,
    direction: np.ndarray,
    scale: float,
    rule: QuadratureRule = TRI_QUAD_DEG5,
) -> sp.csr_matrix:
    """Coupling R mapping scalar coefficients to the velocity load scale*(s d, v).

    `direction` must be an exact unit vector; rescaling is refused so the
    physical coefficient in `scale` cannot silently change meaning.
    """
    if vel_space.mesh is not scalar_space.mesh:
        raise ValueError("spaces live on different meshes")
    direction = np.asarray(direction, dtype=float)
    if abs(np.hypot(direction[0], direction[1]) - 1.0) > 1e-14:
        raise ValueError(f"buoyancy direction must be a unit vector, got {direction}")
    phi_v = _basis_values(vel_space.degree, rule.points)
    phi_s = _basis_values(scalar_space.degree, rule.points)
    _, _, detJ = _cell_geometry(vel_space.mesh)
    local = np.einsum("q,qi,qj,t->tij", rule.weights, phi_v, phi_s, detJ)
    rows = np.repeat(vel_space.cell_dofs, scalar_space.n_local, axis=1).ravel()
    cols = np.tile(scalar_space.cell_dofs, (1, vel_space.n_local)).ravel()
    shape = (vel_space.n_scalar, scalar_space.n_scalar)
    coupling = sp.coo_matrix((local.ravel(), (rows, cols)), shape=shape).tocsr()
    return sp.vstack(
        [scale * direction[0] * coupling, scale * direction[1] * coupling],
        format="csr",
    )


def assemble_load(
    space: FunctionSpace, f, t: float = 0.0, rule: QuadratureRule = TRI_QUAD_DEG5
) -> np.ndarray:
    """Load vector (f(., t), phi_i) by quadrature.

    f takes numpy arrays (x, y, t); vector spaces expect a (fx, fy) pair.
    """
    xq = quadrature_points(space.mesh, rule)
    x, y = xq[:, :, 0], xq[:, :, 1]
    phi = _basis_values(space.degree, rule.points)
    _, _, detJ = _cell_geometry(space.mesh)
    out = np.zeros(space.ndofs)
    if space.components == 1:
        comps = [np.broadcast_to(np.asarray(f(x, y, t), dtype=float), x.shape)]
    else:
        fx, fy = f(x, y, t)
        comps = [
            np.broadcast_to(np.asarray(fx, dtype=float), x.shape),
            np.broadcast_to(np.asarray(fy, dtype=float), x.shape),
        ]
    for comp, fv in enumerate(comps):
        if not np.all(np.isfinite(fv)):
            raise FloatingPointError("load function takes non-finite values")
        local = np.einsum("q,qi,tq,t->ti", rule.weights, phi, fv, detJ)
        np.add.at(out, space.cell_dofs + comp * space.n_scalar, local)
    return out


def function_l2_norm(
    mesh: Mesh, f, t: float = 0.0, components: int = 1, rule: QuadratureRule = TRI_QUAD_DEG5
) -> float:
    """Quadrature L2 norm of an analytic function over the mesh."""
    xq = quadrature_points(mesh, rule)
    x, y = xq[:, :, 0], xq[:, :, 1]
    _, _, detJ = _cell_geometry(mesh)
    if components == 1:
        vals = [np.broadcast_to(np.asarray(f(x, y, t), dtype=float), x.shape)]
    else:
        fx, fy = f(x, y, t)
        vals = [
            np.broadcast_to(np.asarray(fx, dtype=float), x.shape),
            np.broadcast_to(np.asarray(fy, dtype=float), x.shape),
        ]
    total = 0.0
    for fv in vals:
        total += float(np.einsum("q,tq,t->", rule.weights, fv * fv, detJ))
    return math.sqrt(max(total, 0.0))


def values_at_quadrature(
    space: FunctionSpace, coeffs: Coefficients, rule: QuadratureRule = TRI_QUAD_DEG5
) -> np.ndarray:
    """Field values at the quadrature points: (nt, nq) or (nt, nq, 2)."""
    phi = _basis_values(space.degree, rule.points)
    if space.components == 1:
        return np.einsum("ti,qi->tq", coeffs[space.cell_dofs], phi)
    return _advecting_field_at_quadrature(space, coeffs, rule)
