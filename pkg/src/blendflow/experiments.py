"""Long-time cavity experiments, CPU timing comparison and CSV output.

Three configured problems:

* ``nse``       - driven flow on the unit square (16x16 cells) with a fixed
  smooth body force and a divergence-free initial velocity, run over long
  intervals at large step sizes;
* ``natconv``   - buoyancy-driven cavity, vertical walls held at unit
  temperature gap, horizontal walls adiabatic;
* ``doublediff``- thermosolutal cavity on (0,1)x(0,2) (10x20 cells),
  parameterized by the dimensionless groups (Ra, Le, Pr, N) with the drag
  term switched off (infinite permeability).

Every run monitors the per-step energy inequality of the velocity field and
the long-time energy bound with computed constants; a violation or a
non-finite norm aborts loudly.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from . import assembly, fespace, stability
from .fespace import DirichletBC
from .mesh import (
    BoundaryTag,
    Mesh,
    Rect,
    UNIT_SQUARE,
    structured_triangulation,
    tag_boundaries,
)
from .stability import StabilityConstants, gnorm_sq, jump_norm_sq
from .timestepping import (
    BLEBDF,
    SCHEMES,
    BlowUpError,
    BoussinesqStepper,
    DoubleDiffusiveStepper,
    FlowState,
    NavierStokesStepper,
    TimeSeriesRecord,
    extrapolate3,
    run,
)


class BoundViolationError(RuntimeError):
    """A computed norm exceeded the long-time energy bound during a run."""


# --- benchmark data ----------------------------------------------------------


def nse_test_initial_velocity(x, y):
    """Divergence-free starting field of the long-time driven test."""
    return np.sin(np.pi * x) * np.sin(np.pi * y), np.cos(np.pi * x) * np.cos(np.pi * y)


def nse_test_forcing(x, y, t):
    """Steady smooth body force of the long-time driven test."""
    fx = y**2 * np.cos(x * y**2) + np.sin(x) * np.sin(y)
    fy = 2.0 * x * y * np.cos(x * y**2) + np.cos(x) * np.cos(y)
    return fx, fy


# --- configuration -----------------------------------------------------------


@dataclass
class DimensionlessGroups:
    """Cavity groups; Le = Sc/Pr holds exactly by construction."""

    n_ratio: float
    sc: float
    pr: float
    le: float
    ra: float
    da: float

    @classmethod
    def from_cavity(cls, ra: float, le: float, pr: float, n_ratio: float, da_inv: float):
        da = math.inf if da_inv == 0.0 else 1.0 / da_inv
        return cls(n_ratio=n_ratio, sc=le * pr, pr=pr, le=le, ra=ra, da=da)


@dataclass
class ProblemConfig:
    """Everything one run needs; build via the `*_config` helpers."""

    kind: str  # nse | natconv | doublediff
    rect: Rect
    nx: int
    ny: int
    dt: float
    t_end: float
    scheme: str = "blebdf"
    nu: float = 1.0
    kappa: float = 1.0
    dc: float = 1.0
    ri: float = 0.0
    da_inv: float = 0.0
    beta_t: float = 0.0
    beta_c: float = 0.0
    g_mag: float = 1.0
    forcing: Optional[Callable] = None
    heat_source: Optional[Callable] = None
    solute_source: Optional[Callable] = None
    t_left: float = 1.0
    t_right: float = 0.0
    c_left: float = 1.0
    c_right: float = 0.0
    out: Optional[str] = None
    groups: Optional[DimensionlessGroups] = None

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        for name in ("nu", "kappa", "dc"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")


def nse_config(
    nu: float,
    dt: float,
    t_end: float = 400.0,
    nx: int = 16,
    ny: int = 16,
    scheme: str = "blebdf",
    **kw,
) -> ProblemConfig:
    return ProblemConfig(
        kind="nse",
        rect=UNIT_SQUARE,
        nx=nx,
        ny=ny,
        dt=dt,
        t_end=t_end,
        scheme=scheme,
        nu=nu,
        forcing=nse_test_forcing,
        **kw,
    )


def natconv_config(
    nu: float,
    dt: float,
    t_end: float = 150.0,
    ri: float = 1.0,
    kappa: Optional[float] = None,
    nx: int = 16,
    ny: int = 16,
    scheme: str = "blebdf",
    **kw,
) -> ProblemConfig:
    # kappa defaults to nu (unit Prandtl number)
    return ProblemConfig(
        kind="natconv",
        rect=UNIT_SQUARE,
        nx=nx,
        ny=ny,
        dt=dt,
        t_end=t_end,
        scheme=scheme,
        nu=nu,
        kappa=nu if kappa is None else kappa,
        ri=ri,
        **kw,
    )


def doublediff_config(
    ra: float = 1e3,
    le: float = 2.0,
    pr: float = 1.0,
    n_ratio: float = 0.8,
    dt: float = 0.1,
    t_end: float = 10.0,
    nx: int = 10,
    ny: int = 20,
    da_inv: float = 0.0,
    scheme: str = "blebdf",
    **kw,
) -> ProblemConfig:
    """Map the cavity groups to coefficients.

    Standard cavity scaling: nu = Pr, kappa = 1, dc = 1/Le, and the buoyancy
    term Ra*Pr*(T + N*C)*e2, i.e. beta_t*g = Ra*Pr and beta_c*g = Ra*Pr*N.
    """
    return ProblemConfig(
        kind="doublediff",
        rect=Rect(0.0, 1.0, 0.0, 2.0),
        nx=nx,
        ny=ny,
        dt=dt,
        t_end=t_end,
        scheme=scheme,
        nu=pr,
        kappa=1.0,
        dc=1.0 / le,
        da_inv=da_inv,
        beta_t=ra * pr,
        beta_c=ra * pr * n_ratio,
        g_mag=1.0,
        groups=DimensionlessGroups.from_cavity(ra, le, pr, n_ratio, da_inv),
        **kw,
    )


# --- meshes, walls and initial data ------------------------------------------

CAVITY_TAGS = {
    "left": BoundaryTag.ESSENTIAL,
    "right": BoundaryTag.ESSENTIAL,
    "top": BoundaryTag.NATURAL,
    "bottom": BoundaryTag.NATURAL,
}


def cavity_mesh(cfg: ProblemConfig) -> Mesh:
    mesh = structured_triangulation(cfg.nx, cfg.ny, cfg.rect)
    if cfg.kind in ("natconv", "doublediff"):
        mesh = tag_boundaries(mesh, CAVITY_TAGS)
    return mesh


def wall_bcs(space, left_value: float, right_value: float) -> list[DirichletBC]:
    """Prescribed scalar values on the two vertical walls."""
    left = fespace.boundary_scalar_dofs(space, sides=("left",))
    right = fespace.boundary_scalar_dofs(space, sides=("right",))
    return [
        DirichletBC(space, left, left_value),
        DirichletBC(space, right, right_value),
    ]


def initial_field_with_bcs(space, bcs: Sequence[DirichletBC]) -> np.ndarray:
    """Zero field overwritten with the wall values; histories must satisfy
    the essential conditions from the first level on."""
    out = np.zeros(space.ndofs)
    for bc in bcs:
        out[bc.dofs] = bc.values(0.0)
    return out


def zeroed_boundary_interpolant(stepper: NavierStokesStepper, f) -> np.ndarray:
    """Interpolate a velocity field, then zero every boundary dof.

    The long-time test's starting field does not vanish on the walls; the
    discrete space demands essential values, so boundary dofs are clipped.
    """
    u0 = fespace.interpolate(stepper.velocity_space, f)
    u0[stepper.velocity_bc.dofs] = 0.0
    return u0


# --- per-step stability monitoring -------------------------------------------


def grad_norm_sq(stiff1, coeffs) -> float:
    return max(float(coeffs @ (stiff1 @ coeffs)), 0.0)


@dataclass
class MonitorReport:
    steps_checked: int = 0
    max_ledger_margin: float = -math.inf  # max of (lhs - rhs); negative is good
    max_bound_ratio: float = 0.0  # max of lhs/bound; below 1 is good


class StabilityMonitor:
    """Checks, after every step, the per-step energy inequality of the
    velocity (with dual norms over-bounded by C_P times the L2 norm) and the
    long-time energy bound with computed constants.  Raises
    BoundViolationError on the first failure."""

    def __init__(self, cfg: ProblemConfig, stepper, start: FlowState,
                 consts: StabilityConstants, f_dual: float,
                 gamma_dual: float = 0.0, zeta_dual: float = 0.0):
        self.cfg = cfg
        self.stepper = stepper
        self.consts = consts
        self.f_dual = f_dual
        self.gamma_dual = gamma_dual
        self.zeta_dual = zeta_dual
        self.report = MonitorReport()
        dt, nu = cfg.dt, cfg.nu
        g0 = gnorm_sq(start.velocity.levels, stepper.mass_u)
        gu0 = grad_norm_sq(stepper.stiff_u, start.velocity.levels[0])
        gu1 = grad_norm_sq(stepper.stiff_u, start.velocity.levels[1])
        self.e_u0 = g0 + nu * dt / 4.0 * gu0 + nu * dt / 16.0 * gu1
        if cfg.da_inv > 0.0:
            m0 = float(start.velocity.levels[0] @ (stepper.mass_u @ start.velocity.levels[0]))
            m1 = float(start.velocity.levels[1] @ (stepper.mass_u @ start.velocity.levels[1]))
            self.e_u0 += cfg.da_inv * dt / 4.0 * m0 + cfg.da_inv * dt / 16.0 * m1
        self.e_t0 = self.e_c0 = 0.0
        if start.temperature is not None:
            tr = stepper.transport_T
            g0 = gnorm_sq(start.temperature.levels, tr.mass)
            gt0 = grad_norm_sq(tr.stiff, start.temperature.levels[0])
            gt1 = grad_norm_sq(tr.stiff, start.temperature.levels[1])
            self.e_t0 = g0 + cfg.kappa * dt / 4.0 * gt0 + cfg.kappa * dt / 16.0 * gt1
        if start.concentration is not None:
            tr = stepper.transport_C
            g0 = gnorm_sq(start.concentration.levels, tr.mass)
            gc0 = grad_norm_sq(tr.stiff, start.concentration.levels[0])
            gc1 = grad_norm_sq(tr.stiff, start.concentration.levels[1])
            self.e_c0 = g0 + cfg.dc * dt / 4.0 * gc0 + cfg.dc * dt / 16.0 * gc1

    # --- long-time bound -----------------------------------------------------

    def bound(self, k: int) -> float:
        """Energy bound on the state reached after k >= 1 steps."""
        cfg, c = self.cfg, self.consts
        n = k - 1
        if cfg.kind == "nse":
            return stability.nse_bound_rhs(c, self.e_u0, self.f_dual, n, cfg.dt, cfg.nu)
        if cfg.kind == "natconv":
            return stability.natconv_bound_rhs(
                c, self.e_u0, self.e_t0, self.f_dual, self.gamma_dual,
                n, cfg.dt, cfg.nu, cfg.kappa, variant="harmonized",
            )
        return stability.doublediff_bound_rhs(
            c, self.e_u0, self.e_t0, self.e_c0,
            self.f_dual, self.gamma_dual, self.zeta_dual,
            n, cfg.dt, cfg.nu, cfg.kappa, cfg.dc, cfg.da_inv, variant="harmonized",
        )

    def _bounded_energy(self, state: FlowState) -> float:
        cfg, st = self.cfg, self.stepper
        dt = cfg.dt
        total = gnorm_sq(state.velocity.levels, st.mass_u)
        total += cfg.nu * dt / 4.0 * grad_norm_sq(st.stiff_u, state.velocity.newest)
        if cfg.kind == "nse":
            total += cfg.nu * dt / 16.0 * grad_norm_sq(st.stiff_u, state.velocity.levels[1])
            return total
        total += gnorm_sq(state.temperature.levels, st.transport_T.mass)
        total += cfg.kappa * dt / 4.0 * grad_norm_sq(
            st.transport_T.stiff, state.temperature.newest
        )
        if cfg.kind == "doublediff":
            total += gnorm_sq(state.concentration.levels, st.transport_C.mass)
            total += cfg.dc * dt / 4.0 * grad_norm_sq(
                st.transport_C.stiff, state.concentration.newest
            )
            if cfg.da_inv > 0.0:
                m = float(
                    state.velocity.newest @ (st.mass_u @ state.velocity.newest)
                )
                total += cfg.da_inv * dt / 4.0 * m
        return total

    # --- per-step inequality ---------------------------------------------------

    def _ledger(self, prev: FlowState, new: FlowState) -> tuple[float, float]:
        cfg, st = self.cfg, self.stepper
        dt, nu = cfg.dt, cfg.nu
        four = new.velocity.levels + [prev.velocity.levels[2]]
        lhs = (
            gnorm_sq(new.velocity.levels, st.mass_u)
            - gnorm_sq(prev.velocity.levels, st.mass_u)
            + jump_norm_sq(four, st.mass_u) / 12.0
            + nu * dt / 2.0 * grad_norm_sq(st.stiff_u, new.velocity.newest)
        )
        rhs = dt / nu * self.f_dual**2
        if cfg.kind == "nse":
            rhs = dt / (2.0 * nu) * self.f_dual**2
        elif cfg.kind == "natconv":
            t_star = extrapolate3(prev.temperature, st.coeffs)
            t_star_norm = math.sqrt(
                max(float(t_star @ (st.transport_T.mass @ t_star)), 0.0)
            )
            rhs += dt * self.consts.c_p**2 * cfg.ri**2 / nu * t_star_norm**2
        else:
            if cfg.da_inv > 0.0:
                m = float(new.velocity.newest @ (st.mass_u @ new.velocity.newest))
                lhs += cfg.da_inv * dt * m
            t_star = extrapolate3(prev.temperature, st.coeffs)
            c_star = extrapolate3(prev.concentration, st.coeffs)
            t_norm = math.sqrt(max(float(t_star @ (st.transport_T.mass @ t_star)), 0.0))
            c_norm = math.sqrt(max(float(c_star @ (st.transport_C.mass @ c_star)), 0.0))
            mix = cfg.g_mag * (cfg.beta_t * t_norm + cfg.beta_c * c_norm)
            rhs += dt * self.consts.c_p**2 / nu * mix**2
        return lhs, rhs

    def __call__(self, prev: FlowState, new: FlowState) -> None:
        lhs, rhs = self._ledger(prev, new)
        slack = 1e-7 * max(1.0, rhs, abs(lhs)) + 1e-12
        self.report.max_ledger_margin = max(self.report.max_ledger_margin, lhs - rhs)
        if lhs > rhs + slack:
            raise BoundViolationError(
                f"per-step energy inequality violated at step {new.n}: "
                f"{lhs:.6e} > {rhs:.6e}"
            )
        energy = self._bounded_energy(new)
        bound = self.bound(new.n)
        if bound > 0.0:
            ratio = energy / bound
        else:
            ratio = 0.0 if energy <= 1e-12 else math.inf
        self.report.max_bound_ratio = max(self.report.max_bound_ratio, ratio)
        if energy > bound * (1.0 + 1e-9) + 1e-12:
            raise BoundViolationError(
                f"long-time energy bound violated at step {new.n}: "
                f"{energy:.6e} > {bound:.6e}"
            )
        self.report.steps_checked += 1


# --- experiment drivers -------------------------------------------------------


def _build_nse(cfg: ProblemConfig):
    mesh = cavity_mesh(cfg)
    stepper = NavierStokesStepper(
        mesh, cfg.dt, cfg.nu, cfg.forcing or nse_test_forcing, SCHEMES[cfg.scheme]
    )
    u0 = zeroed_boundary_interpolant(stepper, nse_test_initial_velocity)
    state = stepper.startup(u0)
    return mesh, stepper, state


def _zero_vector_source(x, y, t):
    return np.zeros_like(x), np.zeros_like(x)


def _build_natconv(cfg: ProblemConfig):
    mesh = cavity_mesh(cfg)
    # dof layout is a pure function of the mesh, so BCs built on this space
    # are valid on the stepper's own temperature space
    temp_space = fespace.build_space(mesh, degree=2, components=1)
    t_bcs = wall_bcs(temp_space, cfg.t_left, cfg.t_right)
    stepper = BoussinesqStepper(
        mesh, cfg.dt, cfg.nu, cfg.kappa, cfg.ri,
        cfg.forcing or _zero_vector_source,
        cfg.heat_source, t_bcs, SCHEMES[cfg.scheme],
    )
    u0 = np.zeros(stepper.velocity_space.ndofs)
    T0 = initial_field_with_bcs(stepper.temperature_space, t_bcs)
    state = stepper.startup(u0, T0)
    return mesh, stepper, state


def _build_doublediff(cfg: ProblemConfig):
    mesh = cavity_mesh(cfg)
    scalar_space = fespace.build_space(mesh, degree=2, components=1)
    t_bcs = wall_bcs(scalar_space, cfg.t_left, cfg.t_right)
    c_bcs = wall_bcs(scalar_space, cfg.c_left, cfg.c_right)
    stepper = DoubleDiffusiveStepper(
        mesh, cfg.dt, cfg.nu, cfg.kappa, cfg.dc, cfg.da_inv,
        cfg.beta_t, cfg.beta_c, cfg.g_mag,
        cfg.forcing or _zero_vector_source,
        cfg.heat_source, cfg.solute_source,
        t_bcs, c_bcs, SCHEMES[cfg.scheme],
    )
    u0 = np.zeros(stepper.velocity_space.ndofs)
    T0 = initial_field_with_bcs(stepper.temperature_space, t_bcs)
    C0 = initial_field_with_bcs(stepper.concentration_space, c_bcs)
    state = stepper.startup(u0, T0, C0)
    return mesh, stepper, state


def _dual_bound(consts: StabilityConstants, mesh: Mesh, f, components: int) -> float:
    """Computable over-bound C_P * ||f|| of the dual norm of a source."""
    if f is None:
        return 0.0
    return consts.c_p * assembly.function_l2_norm(mesh, f, 0.0, components=components)


def _run_with_monitoring(cfg: ProblemConfig, check: bool):
    if cfg.kind == "nse":
        mesh, stepper, state = _build_nse(cfg)
        consts = stability.nse_constants(cfg.nu, cfg.dt, cfg.rect)
        f_dual = _dual_bound(consts, mesh, cfg.forcing or nse_test_forcing, 2)
        gamma_dual = zeta_dual = 0.0
    elif cfg.kind == "natconv":
        mesh, stepper, state = _build_natconv(cfg)
        consts = stability.natconv_constants(cfg.nu, cfg.kappa, cfg.ri, cfg.dt, cfg.rect)
        f_dual = _dual_bound(consts, mesh, cfg.forcing, 2)
        gamma_dual = _dual_bound(consts, mesh, cfg.heat_source, 1)
        zeta_dual = 0.0
    elif cfg.kind == "doublediff":
        mesh, stepper, state = _build_doublediff(cfg)
        consts = stability.doublediff_constants(
            cfg.nu, cfg.kappa, cfg.dc, cfg.da_inv,
            cfg.beta_t, cfg.beta_c, cfg.g_mag, cfg.dt, cfg.rect,
        )
        f_dual = _dual_bound(consts, mesh, cfg.forcing, 2)
        gamma_dual = _dual_bound(consts, mesh, cfg.heat_source, 1)
        zeta_dual = _dual_bound(consts, mesh, cfg.solute_source, 1)
    else:
        raise ValueError(f"unknown problem kind {cfg.kind!r}")

    # the energy machinery applies to the blended scheme only
    monitoring = check and cfg.scheme == "blebdf"
    monitor = None
    observers = ()
    bound_fn = None
    if monitoring:
        monitor = StabilityMonitor(
            cfg, stepper, state, consts, f_dual, gamma_dual, zeta_dual
        )
        observers = (monitor,)
        bound_fn = monitor.bound
    records, final = run(stepper, state, cfg.t_end, observers, bound_fn)
    return records, final, monitor


def run_nse_cavity(cfg: ProblemConfig, check: bool = True) -> list[TimeSeriesRecord]:
    if cfg.kind != "nse":
        raise ValueError(f"expected an nse config, got {cfg.kind!r}")
    records, _, _ = _run_with_monitoring(cfg, check)
    return records


def run_buoyant_cavity(cfg: ProblemConfig, check: bool = True) -> list[TimeSeriesRecord]:
    if cfg.kind != "natconv":
        raise ValueError(f"expected a natconv config, got {cfg.kind!r}")
    records, _, _ = _run_with_monitoring(cfg, check)
    return records


def run_doublediff_cavity(cfg: ProblemConfig, check: bool = True) -> list[TimeSeriesRecord]:
    if cfg.kind != "doublediff":
        raise ValueError(f"expected a doublediff config, got {cfg.kind!r}")
    records, _, _ = _run_with_monitoring(cfg, check)
    return records


def run_experiment(cfg: ProblemConfig, check: bool = True) -> list[TimeSeriesRecord]:
    runner = {
        "nse": run_nse_cavity,
        "natconv": run_buoyant_cavity,
        "doublediff": run_doublediff_cavity,
    }[cfg.kind]
    return runner(cfg, check)


# --- timing -------------------------------------------------------------------


def cpu_timing_comparison(
    cfg: ProblemConfig,
    schemes: Sequence[str] = ("blebdf", "bdf2"),
    dts: Sequence[float] = (1.0, 0.1, 0.01),
) -> list[tuple[float, str, float]]:
    """Wall-clock seconds per full run, same problem, per scheme and step size.

    Timing only; the stability monitors are disabled so both schemes do
    identical bookkeeping.
    """
    rows = []
    for dt in dts:
        for scheme in schemes:
            run_cfg = replace(cfg, dt=dt, scheme=scheme)
            start = time.perf_counter()
            run_experiment(run_cfg, check=False)
            rows.append((dt, scheme, time.perf_counter() - start))
    return rows


# --- CSV ----------------------------------------------------------------------

CSV_HEADER = "step,t,l2_u,l2_T,l2_C,gnorm_u,bound,elapsed_s"


def _fmt(value) -> str:
    return "" if value is None else repr(float(value))


def write_csv(records: Sequence[TimeSeriesRecord], path) -> None:
    """Full-precision CSV, one row per record; absent fields stay empty."""
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(CSV_HEADER + "\n")
            for r in records:
                fh.write(
                    ",".join(
                        [
                            str(r.step),
                            _fmt(r.t),
                            _fmt(r.l2_u),
                            _fmt(r.l2_T),
                            _fmt(r.l2_C),
                            _fmt(r.gnorm_u),
                            _fmt(r.bound),
                            _fmt(r.elapsed_s),
                        ]
                    )
                    + "\n"
                )
    except OSError as exc:
        raise OSError(f"cannot write records to {path}: {exc}") from exc


def read_csv(path) -> list[TimeSeriesRecord]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header in {path}: {header!r}")
        for line in fh:
            parts = line.rstrip("\n").split(",")
            opt = lambda s: None if s == "" else float(s)
            records.append(
                TimeSeriesRecord(
                    step=int(parts[0]),
                    t=float(parts[1]),
                    l2_u=float(parts[2]),
                    l2_T=opt(parts[3]),
                    l2_C=opt(parts[4]),
                    gnorm_u=opt(parts[5]),
                    bound=opt(parts[6]),
                    elapsed_s=float(parts[7]),
                )
            )
    return records


# --- config files ---------------------------------------------------------------


def parse_config_file(path) -> dict[str, str]:
    """Plain 'key = value' lines, UTF-8, '#' comments."""
    out: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


# --- self-verification suite ------------------------------------------------------


def verify_suite(rng_seed: int = 2024) -> list[tuple[str, bool, str]]:
    """Quick numerical checks of the stability machinery; used by `flow verify`."""
    rng = np.random.default_rng(rng_seed)
    results = []

    lam = np.linalg.eigvalsh(stability.G_MATRIX)
    c_l, c_u = stability.g_eigen_bounds()
    ok = bool(np.all(lam > 0.0) and 0.0 < c_l < c_u)
    results.append(("energy matrix positive definite", ok, f"eigenvalues {lam}"))

    mesh = structured_triangulation(4, 4)
    space = fespace.build_space(mesh, degree=2, components=1)
    mass = assembly.assemble_mass(space)
    worst = 0.0
    for _ in range(200):
        levels = [rng.standard_normal(space.ndofs) for _ in range(4)]
        res = stability.verify_g_identity(levels, mass)
        scale = sum(abs(w @ (mass @ w)) for w in levels) + 1.0
        worst = max(worst, res / scale)
    results.append(
        ("telescoping identity on random histories", worst <= 1e-12, f"max residual {worst:.3e}")
    )

    worst_eqv = 0.0
    for _ in range(200):
        levels = [rng.standard_normal(space.ndofs) for _ in range(3)]
        gsq = gnorm_sq(levels, mass)
        l2sq = sum(float(w @ (mass @ w)) for w in levels)
        worst_eqv = max(worst_eqv, c_l * gsq - l2sq, l2sq - c_u * gsq)
    results.append(
        ("norm equivalence on random triples", worst_eqv <= 1e-10, f"max slack {worst_eqv:.3e}")
    )

    mesh8 = structured_triangulation(8, 8)
    vel = fespace.build_space(mesh8, degree=2, components=2)
    skew_ok = True
    detail = ""
    for _ in range(10):
        w = rng.standard_normal(vel.ndofs)
        conv = assembly.assemble_convection_skew(vel, vel, w)
        asym = abs(conv + conv.T).max()
        scale = abs(conv).max()
        if asym > 1e-13 * max(scale, 1e-30):
            skew_ok = False
            detail = f"asymmetry {asym:.3e} at scale {scale:.3e}"
            break
    results.append(("convection operator skew symmetry", skew_ok, detail or "exact"))

    ratios = stability.ode_error_constant_ratio(-1.0, 1.0, 1.0, [2.0**-8])
    ratio = ratios[0][1]
    results.append(
        ("truncation constant ratio vs two-step scheme", 0.45 <= ratio <= 0.55, f"ratio {ratio:.4f}")
    )

    worst_ext = 0.0
    for _ in range(200):
        levels = [rng.standard_normal(20) for _ in range(3)]
        ext = 3 * levels[0] - 3 * levels[1] + levels[2]
        bound7 = 7.0 * max(np.linalg.norm(w) for w in levels)
        worst_ext = max(worst_ext, np.linalg.norm(ext) - bound7)
    results.append(
        ("extrapolation triangle-inequality bound", worst_ext <= 1e-12, f"max excess {worst_ext:.3e}")
    )
    return results
