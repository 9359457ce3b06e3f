"""Blended-BDF finite element solver for incompressible multiphysics flow.

Mixed Taylor-Hood elements in space; a blended three-level BDF scheme with
third-order extrapolation of the lagged fields in time, so each step costs
one linear solve.  Ships the energy machinery (telescoping norm identity,
norm equivalence constants, long-time bounds) needed to verify that the
computed trajectories are unconditionally long-time stable.
"""

from .mesh import (
    BoundaryTag,
    GeometryError,
    Mesh,
    Rect,
    UNIT_SQUARE,
    mesh_stats,
    structured_triangulation,
    tag_boundaries,
)
from .fespace import (
    DirichletBC,
    FunctionSpace,
    apply_dirichlet,
    build_space,
    dirichlet_bc,
    interpolate,
    l2_norm,
)
from .assembly import (
    TRI_QUAD_DEG5,
    assemble_buoyancy,
    assemble_convection_skew,
    assemble_divergence,
    assemble_load,
    assemble_mass,
    assemble_stiffness,
)
from .solvers import (
    Factorization,
    LinearSystem,
    SingularMatrixError,
    build_saddle_system,
    factorize,
    solve,
)
from .stability import (
    G_MATRIX,
    StabilityConstants,
    g_eigen_bounds,
    gnorm_sq,
    poincare_constant,
    verify_g_identity,
)
from .timestepping import (
    BDF2,
    BLEBDF,
    BlowUpError,
    BoussinesqStepper,
    DoubleDiffusiveStepper,
    FieldHistory,
    FlowState,
    NavierStokesStepper,
    SchemeCoeffs,
    TimeSeriesRecord,
    extrapolate3,
    run,
)
from .experiments import (
    BoundViolationError,
    ProblemConfig,
    doublediff_config,
    natconv_config,
    nse_config,
    run_buoyant_cavity,
    run_doublediff_cavity,
    run_nse_cavity,
    write_csv,
)

__version__ = "0.1.0"
