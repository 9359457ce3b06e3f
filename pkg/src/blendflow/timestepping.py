"""Time stepping for the three flow systems.

Both schemes are three-level linear multistep methods: a blended stencil
with derivative weights (5/3, -5/2, 1, -1/6) and third-order extrapolation
(3, -3, 1) of every lagged field, and the classical two-step stencil
(3/2, -2, 1/2) with its matching extrapolation (2, -1).  Lagging the
advecting and coupling fields makes every step a single linear solve.

Startup follows the constant-history rule: all three levels equal the
initial datum.  Within a coupled step the scalars are solved first, then
the momentum/pressure saddle system; each equation only sees extrapolated
values of the others, so the order is fixed purely for determinism.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp

from . import assembly, fespace, solvers
from .fespace import Coefficients, DirichletBC, FunctionSpace
from .mesh import BoundaryTag, Mesh


class BlowUpError(RuntimeError):
    """A solution norm became non-finite during a run."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"non-finite solution at step {step}")


@dataclass(frozen=True)
class SchemeCoeffs:
    """Derivative and extrapolation weights identifying a scheme.

    derivative applies to (w^{n+1}, w^n, w^{n-1}, w^{n-2}); extrapolation
    to (w^n, w^{n-1}, w^{n-2}).  Derivative weights sum to zero and
    extrapolation weights to one (consistency).
    """

    name: str
    derivative: tuple[float, float, float, float]
    extrapolation: tuple[float, float, float]

    def __post_init__(self):
        if abs(sum(self.derivative)) > 1e-12:
            raise ValueError(f"derivative weights of {self.name} do not sum to 0")
        if abs(sum(self.extrapolation) - 1.0) > 1e-12:
            raise ValueError(f"extrapolation weights of {self.name} do not sum to 1")


BLEBDF = SchemeCoeffs(
    name="blebdf",
    derivative=(5.0 / 3.0, -5.0 / 2.0, 1.0, -1.0 / 6.0),
    extrapolation=(3.0, -3.0, 1.0),
)

BDF2 = SchemeCoeffs(
    name="bdf2",
    derivative=(1.5, -2.0, 0.5, 0.0),
    extrapolation=(2.0, -1.0, 0.0),
)

SCHEMES = {s.name: s for s in (BLEBDF, BDF2)}


class FieldHistory:
    """The three most recent coefficient vectors of a field, newest first."""

    def __init__(self, levels: Sequence[Coefficients]):
        if len(levels) != 3:
            raise ValueError(f"history needs exactly 3 levels, got {len(levels)}")
        n = levels[0].shape[0]
        if any(w.shape[0] != n for w in levels):
            raise ValueError("history levels have mismatched lengths")
        self.levels = [np.asarray(w, dtype=float) for w in levels]

    @classmethod
    def constant(cls, w0: Coefficients) -> "FieldHistory":
        return cls([w0.copy(), w0.copy(), w0.copy()])

    @property
    def newest(self) -> Coefficients:
        return self.levels[0]

    def shifted(self, new: Coefficients) -> "FieldHistory":
        return FieldHistory([new, self.levels[0], self.levels[1]])


def extrapolate3(history: FieldHistory, coeffs: SchemeCoeffs) -> Coefficients:
    """Explicit guess for the next level: e1 w^n + e2 w^{n-1} + e3 w^{n-2}."""
    e = coeffs.extrapolation
    return e[0] * history.levels[0] + e[1] * history.levels[1] + e[2] * history.levels[2]


@dataclass
class FlowState:
    """Discrete unknowns at step n (t = t0 + n dt)."""

    velocity: FieldHistory
    pressure: Coefficients
    t: float
    n: int
    temperature: Optional[FieldHistory] = None
    concentration: Optional[FieldHistory] = None


@dataclass
class TimeSeriesRecord:
    """Per-step diagnostics of a run."""

    step: int
    t: float
    l2_u: float
    l2_T: Optional[float] = None
    l2_C: Optional[float] = None
    gnorm_u: Optional[float] = None  # squared G-norm of the velocity triple
    bound: Optional[float] = None  # long-time energy bound on the same quantity
    elapsed_s: float = 0.0


def _history_rhs(mass: sp.spmatrix, history: FieldHistory, coeffs: SchemeCoeffs, dt: float):
    a = coeffs.derivative
    lagged = a[1] * history.levels[0] + a[2] * history.levels[1] + a[3] * history.levels[2]
    return -(mass @ lagged) / dt


class NavierStokesStepper:
    """One linear saddle solve per step for the incompressible momentum system.

    forcing: callable (x, y, t) -> (fx, fy), evaluated at the new time level;
    assembled once when `forcing_constant` is true.
    velocity_bc_value: boundary velocity, constant pair or callable; defaults
    to no-slip on every tagged boundary segment.
    """

    def __init__(
        self,
        mesh: Mesh,
        dt: float,
        nu: float,
        forcing,
        coeffs: SchemeCoeffs = BLEBDF,
        forcing_constant: bool = True,
        velocity_bc_value=(0.0, 0.0),
    ):
        if dt <= 0.0 or nu <= 0.0:
            raise ValueError(f"need dt > 0 and nu > 0, got dt={dt}, nu={nu}")
        self.mesh = mesh
        self.dt = dt
        self.nu = nu
        self.coeffs = coeffs
        self.forcing = forcing
        self.forcing_constant = forcing_constant
        self.velocity_space = fespace.build_space(mesh, degree=2, components=2)
        self.pressure_space = fespace.build_space(mesh, degree=1, components=1)
        self.mass_u = assembly.assemble_mass(self.velocity_space)
        self.stiff_u = assembly.assemble_stiffness(self.velocity_space, 1.0)
        self.div = assembly.assemble_divergence(self.velocity_space, self.pressure_space)
        mass_p = assembly.assemble_mass(self.pressure_space)
        self.pressure_weights = np.asarray(mass_p @ np.ones(self.pressure_space.ndofs))
        all_tags = (BoundaryTag.WALL, BoundaryTag.ESSENTIAL, BoundaryTag.NATURAL)
        self.velocity_bc = fespace.dirichlet_bc(
            self.velocity_space, all_tags, velocity_bc_value
        )
        self._load = (
            assembly.assemble_load(self.velocity_space, forcing, 0.0)
            if forcing_constant
            else None
        )

    # extra zeroth-order mass term and extra load, used by the coupled steppers
    def _momentum_extras(self, state: FlowState, dt_next: float):
        return None, 0.0

    def load_at(self, t: float) -> np.ndarray:
        if self._load is not None:
            return self._load
        return assembly.assemble_load(self.velocity_space, self.forcing, t)

    def startup(self, u0: Coefficients) -> FlowState:
        return FlowState(
            velocity=FieldHistory.constant(u0),
            pressure=np.zeros(self.pressure_space.ndofs),
            t=0.0,
            n=0,
        )

    def _solve_momentum(self, state: FlowState, extra_load) -> tuple[Coefficients, Coefficients]:
        a0 = self.coeffs.derivative[0]
        t_new = state.t + self.dt
        u_star = extrapolate3(state.velocity, self.coeffs)
        conv = assembly.assemble_convection_skew(
            self.velocity_space, self.velocity_space, u_star
        )
        extra_mass, extra_coeff = self._momentum_extras(state, t_new)
        A = (a0 / self.dt) * self.mass_u + self.nu * self.stiff_u + conv
        if extra_mass is not None:
            A = A + extra_coeff * extra_mass
        rhs = self.load_at(t_new) + _history_rhs(
            self.mass_u, state.velocity, self.coeffs, self.dt
        )
        if extra_load is not None:
            rhs = rhs + extra_load
        system = solvers.build_saddle_system(A, self.div, rhs, self.pressure_weights)
        system = fespace.apply_dirichlet(system, self.velocity_bc, t_new)
        x = solvers.factorize(system.A).solve(system.b)
        u_new, p_aux, _ = solvers.split_saddle(
            x, self.velocity_space.ndofs, self.pressure_space.ndofs
        )
        # the saddle block is assembled with +B^T, so the solve returns -p
        return u_new, -p_aux

    def step(self, state: FlowState) -> FlowState:
        u_new, p_new = self._solve_momentum(state, extra_load=None)
        return FlowState(
            velocity=state.velocity.shifted(u_new),
            pressure=p_new,
            t=state.t + self.dt,
            n=state.n + 1,
        )


class _ScalarTransport:
    """Advection-diffusion sub-stepper for temperature or concentration."""

    def __init__(self, space, diffusivity, source, bcs, source_constant=True):
        if diffusivity <= 0.0:
            raise ValueError(f"diffusivity must be positive, got {diffusivity}")
        self.space = space
        self.diffusivity = diffusivity
        self.source = source
        self.bcs = bcs
        self.mass = assembly.assemble_mass(space)
        self.stiff = assembly.assemble_stiffness(space, 1.0)
        self._load = (
            assembly.assemble_load(space, source, 0.0)
            if source is not None and source_constant
            else None
        )
        self.source_constant = source_constant

    def load_at(self, t: float) -> np.ndarray:
        if self.source is None:
            return np.zeros(self.space.ndofs)
        if self._load is not None:
            return self._load
        return assembly.assemble_load(self.space, self.source, t)

    def solve(self, history, u_star, coeffs, dt, t_new, vel_space) -> Coefficients:
        a0 = coeffs.derivative[0]
        conv = assembly.assemble_convection_skew(self.space, vel_space, u_star)
        A = (a0 / dt) * self.mass + self.diffusivity * self.stiff + conv
        rhs = self.load_at(t_new) + _history_rhs(self.mass, history, coeffs, dt)
        system = fespace.apply_dirichlet(
            solvers.LinearSystem(sp.csr_matrix(A), rhs), self.bcs, t_new
        )
        return solvers.factorize(system.A).solve(system.b)


class BoussinesqStepper(NavierStokesStepper):
    """Momentum system plus temperature transport, coupled by buoyancy.

    The temperature solve uses the extrapolated velocity and the momentum
    solve the extrapolated temperature, so the two linear systems decouple
    within a step.
    """

    def __init__(
        self,
        mesh: Mesh,
        dt: float,
        nu: float,
        kappa: float,
        ri: float,
        forcing,
        heat_source,
        temperature_bcs: Sequence[DirichletBC],
        coeffs: SchemeCoeffs = BLEBDF,
        forcing_constant: bool = True,
    ):
        super().__init__(mesh, dt, nu, forcing, coeffs, forcing_constant)
        self.kappa = kappa
        self.ri = ri
        self.temperature_space = fespace.build_space(mesh, degree=2, components=1)
        self.transport_T = _ScalarTransport(
            self.temperature_space, kappa, heat_source, list(temperature_bcs)
        )
        self.buoyancy = assembly.assemble_buoyancy(
            self.velocity_space, self.temperature_space, np.array([0.0, 1.0]), 1.0
        )

    @property
    def mass_T(self):
        return self.transport_T.mass

    def startup(self, u0: Coefficients, T0: Coefficients) -> FlowState:
        base = super().startup(u0)
        return replace(base, temperature=FieldHistory.constant(T0))

    def _buoyancy_load(self, state: FlowState) -> np.ndarray:
        t_star = extrapolate3(state.temperature, self.coeffs)
        return self.ri * (self.buoyancy @ t_star)

    def step(self, state: FlowState) -> FlowState:
        t_new = state.t + self.dt
        u_star = extrapolate3(state.velocity, self.coeffs)
        T_new = self.transport_T.solve(
            state.temperature, u_star, self.coeffs, self.dt, t_new, self.velocity_space
        )
        u_new, p_new = self._solve_momentum(state, extra_load=self._buoyancy_load(state))
        return FlowState(
            velocity=state.velocity.shifted(u_new),
            pressure=p_new,
            t=t_new,
            n=state.n + 1,
            temperature=state.temperature.shifted(T_new),
        )


class DoubleDiffusiveStepper(BoussinesqStepper):
    """Darcy-Brinkman system: temperature and concentration drive buoyancy,
    and an optional zeroth-order drag term da_inv*(u, v) enters the momentum
    equation.  da_inv = 0 disables the drag (infinite permeability)."""

    def __init__(
        self,
        mesh: Mesh,
        dt: float,
        nu: float,
        kappa: float,
        dc: float,
        da_inv: float,
        beta_t: float,
        beta_c: float,
        g_mag: float,
        forcing,
        heat_source,
        solute_source,
        temperature_bcs: Sequence[DirichletBC],
        concentration_bcs: Sequence[DirichletBC],
        coeffs: SchemeCoeffs = BLEBDF,
        forcing_constant: bool = True,
    ):
        if da_inv < 0.0:
            raise ValueError(f"inverse Darcy number must be >= 0, got {da_inv}")
        super().__init__(
            mesh, dt, nu, kappa, 0.0, forcing, heat_source, temperature_bcs,
            coeffs, forcing_constant,
        )
        self.dc = dc
        self.da_inv = da_inv
        self.beta_t = beta_t
        self.beta_c = beta_c
        self.g_mag = g_mag
        self.concentration_space = fespace.build_space(mesh, degree=2, components=1)
        self.transport_C = _ScalarTransport(
            self.concentration_space, dc, solute_source, list(concentration_bcs)
        )

    @property
    def mass_C(self):
        return self.transport_C.mass

    def startup(
        self, u0: Coefficients, T0: Coefficients, C0: Coefficients
    ) -> FlowState:
        base = super().startup(u0, T0)
        return replace(base, concentration=FieldHistory.constant(C0))

    def _momentum_extras(self, state: FlowState, t_new: float):
        if self.da_inv == 0.0:
            return None, 0.0
        return self.mass_u, self.da_inv

    def _buoyancy_load(self, state: FlowState) -> np.ndarray:
        t_star = extrapolate3(state.temperature, self.coeffs)
        c_star = extrapolate3(state.concentration, self.coeffs)
        mixture = self.beta_t * t_star + self.beta_c * c_star
        return self.g_mag * (self.buoyancy @ mixture)

    def step(self, state: FlowState) -> FlowState:
        t_new = state.t + self.dt
        u_star = extrapolate3(state.velocity, self.coeffs)
        T_new = self.transport_T.solve(
            state.temperature, u_star, self.coeffs, self.dt, t_new, self.velocity_space
        )
        C_new = self.transport_C.solve(
            state.concentration, u_star, self.coeffs, self.dt, t_new, self.velocity_space
        )
        u_new, p_new = self._solve_momentum(state, extra_load=self._buoyancy_load(state))
        return FlowState(
            velocity=state.velocity.shifted(u_new),
            pressure=p_new,
            t=t_new,
            n=state.n + 1,
            temperature=state.temperature.shifted(T_new),
            concentration=state.concentration.shifted(C_new),
        )


def n_steps_for(t_end: float, dt: float) -> int:
    """ceil(t_end/dt) with a guard against float noise just above an integer."""
    return int(math.ceil(t_end / dt - 1e-12))


def run(
    stepper,
    state: FlowState,
    t_end: float,
    observers: Sequence[Callable[[FlowState, FlowState], None]] = (),
    bound_fn: Optional[Callable[[int], float]] = None,
) -> tuple[list[TimeSeriesRecord], FlowState]:
    """Advance `state` to t_end, recording per-step diagnostics.

    observers are called with (previous, new) state after every step and may
    raise to abort; bound_fn(k) supplies the energy bound recorded after k
    steps.  Raises BlowUpError as soon as any norm is non-finite.
    """
    if t_end <= 0.0:
        raise ValueError(f"t_end must be positive, got {t_end}")
    from .stability import gnorm_sq  # local import to avoid a cycle

    records: list[TimeSeriesRecord] = []
    wall_start = time.perf_counter()
    steps = n_steps_for(t_end, stepper.dt)
    for _ in range(steps):
        try:
            new_state = stepper.step(state)
        except solvers.SingularMatrixError as exc:
            raise BlowUpError(state.n + 1, f"solver failure at step {state.n + 1}: {exc}")
        l2_u = fespace.l2_norm(
            stepper.velocity_space, new_state.velocity.newest, stepper.mass_u
        )
        l2_T = l2_C = None
        if new_state.temperature is not None:
            l2_T = fespace.l2_norm(
                stepper.temperature_space, new_state.temperature.newest, stepper.mass_T
            )
        if new_state.concentration is not None:
            l2_C = fespace.l2_norm(
                stepper.concentration_space, new_state.concentration.newest, stepper.mass_C
            )
        finite = np.isfinite(l2_u) and all(
            v is None or np.isfinite(v) for v in (l2_T, l2_C)
        )
        if not finite:
            raise BlowUpError(new_state.n)
        gnorm = gnorm_sq(new_state.velocity.levels, stepper.mass_u)
        bound = bound_fn(new_state.n) if bound_fn is not None else None
        records.append(
            TimeSeriesRecord(
                step=new_state.n,
                t=new_state.t,
                l2_u=l2_u,
                l2_T=l2_T,
                l2_C=l2_C,
                gnorm_u=gnorm,
                bound=bound,
                elapsed_s=time.perf_counter() - wall_start,
            )
        )
        for obs in observers:
            obs(state, new_state)
        state = new_state
    return records, state
