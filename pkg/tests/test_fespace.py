import numpy as np
import pytest
import scipy.sparse as sp

from blendflow import assembly, fespace
from blendflow.fespace import DirichletBC, apply_dirichlet, build_space, dirichlet_bc
from blendflow.mesh import BoundaryTag, structured_triangulation
from blendflow.solvers import LinearSystem, factorize


def brute_force_edge_count(mesh) -> int:
    edges = set()
    for a, b, c in mesh.triangles:
        for u, v in ((a, b), (b, c), (c, a)):
            edges.add((min(u, v), max(u, v)))
    return len(edges)


@pytest.mark.parametrize("nx,ny", [(1, 1), (3, 2), (8, 8), (16, 16)])
def test_edge_count_formula(nx, ny):
    mesh = structured_triangulation(nx, ny)
    assert brute_force_edge_count(mesh) == 3 * nx * ny + nx + ny


def test_dof_counts(mesh16):
    # scalar P1 = vertices; scalar P2 = vertices + edges; vector doubles
    assert build_space(mesh16, 1, 1).ndofs == 289
    p2 = build_space(mesh16, 2, 1)
    assert p2.ndofs == 289 + brute_force_edge_count(mesh16)
    assert build_space(mesh16, 2, 2).ndofs == 2 * (289 + 800) == 2178


def test_dof_count_tiny():
    mesh = structured_triangulation(1, 1)
    assert build_space(mesh, 1, 1).ndofs == 4


def test_unsupported_degree(mesh4):
    with pytest.raises(ValueError):
        build_space(mesh4, 3, 1)


def test_interpolate_basics(mesh8):
    space = build_space(mesh8, 1, 1)
    zero = fespace.interpolate(space, lambda x, y: np.zeros_like(x))
    assert np.array_equal(zero, np.zeros(space.ndofs))
    xs = fespace.interpolate(space, lambda x, y: x)
    assert np.array_equal(xs, space.dof_coords[:, 0])


def test_interpolate_peak_value(mesh16):
    space = build_space(mesh16, 2, 1)
    c = fespace.interpolate(space, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
    center = np.flatnonzero(
        (np.abs(space.dof_coords[:, 0] - 0.5) < 1e-14)
        & (np.abs(space.dof_coords[:, 1] - 0.5) < 1e-14)
    )
    assert center.size == 1
    assert c[center[0]] == pytest.approx(1.0, abs=1e-15)


def test_interpolate_rejects_nonfinite(mesh4):
    space = build_space(mesh4, 1, 1)
    with pytest.raises(FloatingPointError):
        fespace.interpolate(space, lambda x, y: np.where(x > 0.4, np.inf, 0.0))


def test_l2_norm_constant(mesh8):
    # interpolating a constant c over area A gives norm c*sqrt(A)
    space = build_space(mesh8, 2, 1)
    mass = assembly.assemble_mass(space)
    one = fespace.interpolate(space, lambda x, y: np.ones_like(x))
    assert fespace.l2_norm(space, one, mass) == pytest.approx(1.0, rel=1e-12)
    assert fespace.l2_norm(space, np.zeros(space.ndofs), mass) == 0.0
    c = fespace.interpolate(space, lambda x, y: np.full_like(x, 3.25))
    assert fespace.l2_norm(space, c, mass) == pytest.approx(3.25, rel=1e-12)


def test_l2_norm_sine_product(mesh16):
    # exact integral of sin^2(pi x) sin^2(pi y) over the unit square is 1/4
    space = build_space(mesh16, 2, 1)
    mass = assembly.assemble_mass(space)
    c = fespace.interpolate(space, lambda x, y: np.sin(np.pi * x) * np.sin(np.pi * y))
    assert fespace.l2_norm(space, c, mass) == pytest.approx(0.5, abs=1e-3)


def test_l2_norm_dimension_mismatch(mesh4):
    space = build_space(mesh4, 1, 1)
    mass = assembly.assemble_mass(space)
    with pytest.raises(ValueError):
        fespace.l2_norm(space, np.zeros(space.ndofs + 1), mass)


def test_p2_interpolation_exact_for_quadratics(mesh4):
    space = build_space(mesh4, 2, 1)
    coeffs = fespace.interpolate(space, lambda x, y: x**2 + 0.5 * x * y - y**2)
    vals = assembly.values_at_quadrature(space, coeffs)
    pts = assembly.quadrature_points(mesh4)
    exact = pts[:, :, 0] ** 2 + 0.5 * pts[:, :, 0] * pts[:, :, 1] - pts[:, :, 1] ** 2
    assert np.abs(vals - exact).max() <= 1e-12


def _poisson_system(space):
    stiff = assembly.assemble_stiffness(space, 1.0)
    load = assembly.assemble_load(space, lambda x, y, t: np.ones_like(x))
    return LinearSystem(sp.csr_matrix(stiff), load)


def test_apply_dirichlet_homogeneous_boundary(mesh8):
    space = build_space(mesh8, 2, 1)
    bc = dirichlet_bc(space, (BoundaryTag.WALL,), 0.0)
    system = apply_dirichlet(_poisson_system(space), bc)
    x = factorize(system.A).solve(system.b)
    assert np.abs(x[bc.dofs]).max() <= 1e-14
    assert x.max() > 0.0  # interior actually solved


def test_apply_dirichlet_empty_noop(mesh4):
    space = build_space(mesh4, 1, 1)
    system = _poisson_system(space)
    bc = DirichletBC(space, np.array([], dtype=np.int64), 0.0)
    out = apply_dirichlet(system, bc)
    assert out is system


def test_apply_dirichlet_prescribed_value(mesh8):
    space = build_space(mesh8, 2, 1)
    left = fespace.boundary_scalar_dofs(space, sides=("left",))
    others = np.setdiff1d(
        fespace.boundary_scalar_dofs(space), left
    )
    bcs = [DirichletBC(space, left, 1.0), DirichletBC(space, others, 0.0)]
    system = apply_dirichlet(_poisson_system(space), bcs)
    x = factorize(system.A).solve(system.b)
    assert np.array_equal(x[left], np.ones(left.size))


def test_apply_dirichlet_idempotent(mesh4):
    space = build_space(mesh4, 2, 1)
    bc = dirichlet_bc(space, (BoundaryTag.WALL,), 2.0)
    once = apply_dirichlet(_poisson_system(space), bc)
    twice = apply_dirichlet(once, bc)
    assert np.array_equal(once.A.toarray(), twice.A.toarray())
    assert np.array_equal(once.b, twice.b)


def test_apply_dirichlet_preserves_symmetry(mesh4):
    space = build_space(mesh4, 2, 1)
    bc = dirichlet_bc(space, (BoundaryTag.WALL,), 1.5)
    system = apply_dirichlet(_poisson_system(space), bc)
    asym = np.abs(system.A.toarray() - system.A.toarray().T).max()
    assert asym == 0.0


def test_apply_dirichlet_out_of_range(mesh4):
    space = build_space(mesh4, 1, 1)
    system = _poisson_system(space)
    bad = DirichletBC(space, np.array([10_000]), 0.0)
    with pytest.raises(IndexError):
        apply_dirichlet(system, bad)


def test_vector_bc_components(mesh4):
    space = build_space(mesh4, 2, 2)
    bc = dirichlet_bc(space, (BoundaryTag.WALL,), (3.0, -1.0))
    vals = bc.values()
    is_y = bc.dofs >= space.n_scalar
    assert np.all(vals[~is_y] == 3.0)
    assert np.all(vals[is_y] == -1.0)


def test_time_dependent_bc_values(mesh4):
    space = build_space(mesh4, 2, 1)
    dofs = fespace.boundary_scalar_dofs(space, sides=("left",))
    bc = DirichletBC(space, dofs, lambda x, y, t: t * y)
    got = bc.values(2.0)
    assert got == pytest.approx(2.0 * space.dof_coords[dofs, 1])
