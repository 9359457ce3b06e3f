"""Energy-stability machinery for the three-level blended scheme.

The scheme's time-derivative stencil admits a positive definite 3x3 energy
matrix G that telescopes the derivative term into a norm difference plus a
nonnegative third-difference jump.  This module houses that matrix, the
associated norms and identities, the domain Poincare constant, the
long-time decay constants, and evaluators for the long-time energy bounds
of the three flow systems.

Two variants of each bound evaluator exist:

* ``printed``  - the formulas exactly as published, including a known
  missing square on one dual norm of the convection bound and an infinite
  coupling constant when the Darcy drag vanishes;
* ``harmonized`` - the same formulas with the dual norm squared and, for
  vanishing Darcy drag, the coupling constant obtained by absorbing the
  buoyancy into the viscous term instead (always finite, always valid).

Dual norms of source terms are never computed exactly; callers over-bound
them by ``C_P * ||f||`` which keeps every inequality one-sided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .mesh import Rect

# Energy matrix of the blended three-level stencil (G-stability framework).
G_MATRIX = np.array(
    [
        [19.0, -12.0, 3.0],
        [-12.0, 10.0, -3.0],
        [3.0, -3.0, 1.0],
    ]
) / 12.0
G_MATRIX.flags.writeable = False

# coefficients of the third difference w^{n+1} - 3 w^n + 3 w^{n-1} - w^{n-2}
_JUMP_WEIGHTS = (1.0, -3.0, 3.0, -1.0)

# time-derivative stencil the G identity telescopes (newest level first)
_DERIVATIVE_WEIGHTS = (5.0 / 3.0, -5.0 / 2.0, 1.0, -1.0 / 6.0)


def g_eigen_bounds() -> tuple[float, float]:
    """Norm equivalence constants (C_l, C_u).

    With lam the eigenvalues of G, C_l = 1/max(lam) and C_u = 1/min(lam),
    so that C_l ||W||_G^2 <= ||W||^2 <= C_u ||W||_G^2 componentwise.
    """
    lam = np.linalg.eigvalsh(G_MATRIX)
    return 1.0 / float(lam[-1]), 1.0 / float(lam[0])


def _mass_inner(mass: sp.spmatrix, a: np.ndarray, b: np.ndarray) -> float:
    return float(a @ (mass @ b))


def gnorm_sq(levels: Sequence[np.ndarray], mass: sp.spmatrix) -> float:
    """||W||_G^2 = sum_ij G_ij (w_i, w_j)_M for a triple, newest level first."""
    if len(levels) != 3:
        raise ValueError(f"need exactly 3 levels, got {len(levels)}")
    n = levels[0].shape[0]
    if any(w.shape[0] != n for w in levels) or mass.shape != (n, n):
        raise ValueError("levels and mass matrix have mismatched dimensions")
    mw = [mass @ w for w in levels]
    total = 0.0
    for i in range(3):
        for j in range(3):
            total += G_MATRIX[i, j] * float(levels[i] @ mw[j])
    return total


def jump_norm_sq(levels: Sequence[np.ndarray], mass: sp.spmatrix) -> float:
    """Squared M-norm of the third difference over four levels, newest first."""
    if len(levels) != 4:
        raise ValueError(f"need exactly 4 levels, got {len(levels)}")
    jump = sum(c * w for c, w in zip(_JUMP_WEIGHTS, levels))
    return max(_mass_inner(mass, jump, jump), 0.0)


def verify_g_identity(levels: Sequence[np.ndarray], mass: sp.spmatrix) -> float:
    """Residual of the telescoping identity over four levels (newest first).

    The derivative stencil tested against the newest level must equal the
    G-norm difference of consecutive triples plus 1/12 of the squared jump.
    Exact in real arithmetic; returns |LHS - RHS|.
    """
    if len(levels) != 4:
        raise ValueError(f"need exactly 4 levels, got {len(levels)}")
    stencil = sum(c * w for c, w in zip(_DERIVATIVE_WEIGHTS, levels))
    lhs = _mass_inner(mass, stencil, levels[0])
    rhs = (
        gnorm_sq(levels[:3], mass)
        - gnorm_sq(levels[1:], mass)
        + jump_norm_sq(levels, mass) / 12.0
    )
    return abs(lhs - rhs)


def poincare_constant(rect: Rect) -> float:
    """Sharp constant of ||v|| <= C_P ||grad v|| on H^1_0 of the rectangle.

    Equals the reciprocal square root of the first Dirichlet-Laplacian
    eigenvalue pi^2 (1/a^2 + 1/b^2) for side lengths a, b.
    """
    a, b = rect.width, rect.height
    lam1 = math.pi**2 * (1.0 / a**2 + 1.0 / b**2)
    return 1.0 / math.sqrt(lam1)


def extrapolation_coefficients() -> tuple[float, float, float]:
    """Weights of the third-order extrapolation 3 w^n - 3 w^{n-1} + w^{n-2}."""
    return (3.0, -3.0, 1.0)


def _decay_rate(c_l: float, diffusivity: float, dt: float, c_p: float) -> float:
    return min(c_l * diffusivity * dt / (16.0 * c_p**2), 0.75)


@dataclass(frozen=True)
class StabilityConstants:
    """Every constant entering the long-time bounds, precomputed per problem.

    alpha/beta/delta are the geometric decay rates of the velocity,
    temperature and concentration energies; the K constants transfer scalar
    energy into the velocity bound through the buoyancy coupling.
    """

    c_l: float
    c_u: float
    c_p: float
    alpha: float
    beta: float = 0.0
    delta: float = 0.0
    k_alpha: float = 0.0
    k_t_alpha: float = 0.0
    k_c_alpha: float = 0.0
    k_t_alpha_harmonized: float = 0.0
    k_c_alpha_harmonized: float = 0.0


def nse_constants(nu: float, dt: float, rect: Rect) -> StabilityConstants:
    c_l, c_u = g_eigen_bounds()
    c_p = poincare_constant(rect)
    return StabilityConstants(c_l=c_l, c_u=c_u, c_p=c_p, alpha=_decay_rate(c_l, nu, dt, c_p))


def natconv_constants(
    nu: float, kappa: float, ri: float, dt: float, rect: Rect
) -> StabilityConstants:
    c_l, c_u = g_eigen_bounds()
    c_p = poincare_constant(rect)
    alpha = _decay_rate(c_l, nu, dt, c_p)
    beta = _decay_rate(c_l, kappa, dt, c_p)
    k_alpha = 49.0 * c_u * c_p**2 * ri**2 * dt / (nu * alpha)
    return StabilityConstants(
        c_l=c_l, c_u=c_u, c_p=c_p, alpha=alpha, beta=beta, k_alpha=k_alpha
    )


def doublediff_constants(
    nu: float,
    kappa: float,
    dc: float,
    da_inv: float,
    beta_t: float,
    beta_c: float,
    g_mag: float,
    dt: float,
    rect: Rect,
) -> StabilityConstants:
    """Constants of the Darcy-Brinkman bound.

    The published coupling constants carry a factor Da = 1/da_inv and blow
    up when the Darcy drag vanishes; the harmonized variants absorb the
    buoyancy into the viscous term instead (factor C_P^2/nu), matching the
    single-scalar convection bound, and stay finite for da_inv = 0.
    """
    c_l, c_u = g_eigen_bounds()
    c_p = poincare_constant(rect)
    alpha = min(c_l * (nu + c_p**2 * da_inv) * dt / (16.0 * c_p**2), 0.75)
    beta = _decay_rate(c_l, kappa, dt, c_p)
    delta = _decay_rate(c_l, dc, dt, c_p)
    da = math.inf if da_inv == 0.0 else 1.0 / da_inv
    k_t = 49.0 * c_u * da * dt * (g_mag * beta_t) ** 2 / alpha
    k_c = 49.0 * c_u * da * dt * (g_mag * beta_c) ** 2 / alpha
    absorb = min(da, c_p**2 / nu)
    k_t_h = 49.0 * c_u * absorb * dt * (g_mag * beta_t) ** 2 / alpha
    k_c_h = 49.0 * c_u * absorb * dt * (g_mag * beta_c) ** 2 / alpha
    return StabilityConstants(
        c_l=c_l,
        c_u=c_u,
        c_p=c_p,
        alpha=alpha,
        beta=beta,
        delta=delta,
        k_t_alpha=k_t,
        k_c_alpha=k_c,
        k_t_alpha_harmonized=k_t_h,
        k_c_alpha_harmonized=k_c_h,
    )


def _forcing_tail(c_p: float, c_l: float, diffusivity: float, dt: float) -> float:
    """max{8 C_P^2 / (C_l k^2), 2 dt / (3 k)}: the geometric-sum tail factor."""
    return max(
        8.0 * c_p**2 / (c_l * diffusivity**2),
        2.0 * dt / (3.0 * diffusivity),
    )


def nse_bound_rhs(
    consts: StabilityConstants,
    init_energy: float,
    f_dual_bound: float,
    n: int,
    dt: float,
    nu: float,
) -> float:
    """Long-time energy bound on the velocity triple after n+1 steps.

    init_energy is the starting value of the bounded quantity:
    ||U_0||_G^2 + nu dt/4 ||grad u^0||^2 + nu dt/16 ||grad u^{-1}||^2.
    """
    decay = (1.0 + consts.alpha) ** (-(n + 1))
    tail = _forcing_tail(consts.c_p, consts.c_l, nu, dt)
    return decay * init_energy + tail * f_dual_bound**2


def natconv_bound_rhs(
    consts: StabilityConstants,
    u_init_energy: float,
    t_init_energy: float,
    f_dual_bound: float,
    gamma_dual_bound: float,
    n: int,
    dt: float,
    nu: float,
    kappa: float,
    variant: str = "printed",
) -> float:
    """Long-time bound for the coupled velocity/temperature energies.

    ``printed`` keeps the published unsquared dual norm on the body force;
    ``harmonized`` squares it (the form the per-step estimates produce).
    """
    if variant not in ("printed", "harmonized"):
        raise ValueError(f"unknown variant {variant!r}")
    a, b = consts.alpha, consts.beta
    u_part = (1.0 + a) ** (-(n + 1)) * u_init_energy
    t_part = (consts.k_alpha + 1.0 / (1.0 + b)) * (1.0 + b) ** (-n) * t_init_energy
    gamma_part = (
        (consts.k_alpha + 1.0)
        * _forcing_tail(consts.c_p, consts.c_l, kappa, dt)
        * gamma_dual_bound**2
    )
    f_factor = max(
        16.0 * consts.c_p**2 / (consts.c_l * nu**2), 4.0 * dt / (3.0 * nu)
    )
    f_term = f_dual_bound if variant == "printed" else f_dual_bound**2
    return u_part + t_part + gamma_part + f_factor * f_term


def doublediff_bound_rhs(
    consts: StabilityConstants,
    u_init_energy: float,
    t_init_energy: float,
    c_init_energy: float,
    f_dual_bound: float,
    gamma_dual_bound: float,
    zeta_dual_bound: float,
    n: int,
    dt: float,
    nu: float,
    kappa: float,
    dc: float,
    da_inv: float,
    variant: str = "printed",
) -> float:
    """Long-time bound for the velocity/temperature/concentration energies.

    u_init_energy must include the Darcy terms
    da_inv dt/4 ||u^0||^2 + da_inv dt/16 ||u^{-1}||^2 when da_inv > 0.
    The printed coupling constants are infinite at da_inv = 0 (the bound is
    then vacuous); ``harmonized`` stays finite, see `doublediff_constants`.
    """
    if variant not in ("printed", "harmonized"):
        raise ValueError(f"unknown variant {variant!r}")
    if variant == "printed":
        k_t, k_c = consts.k_t_alpha, consts.k_c_alpha
    else:
        k_t, k_c = consts.k_t_alpha_harmonized, consts.k_c_alpha_harmonized
    a, b, d = consts.alpha, consts.beta, consts.delta
    u_part = (1.0 + a) ** (-(n + 1)) * u_init_energy
    t_part = (k_t + 1.0 / (1.0 + b)) * (1.0 + b) ** (-n) * t_init_energy
    c_part = (k_c + 1.0 / (1.0 + d)) * (1.0 + d) ** (-n) * c_init_energy
    gamma_part = (
        (k_t + 1.0) * _forcing_tail(consts.c_p, consts.c_l, kappa, dt) * gamma_dual_bound**2
    )
    zeta_part = (
        (k_c + 1.0) * _forcing_tail(consts.c_p, consts.c_l, dc, dt) * zeta_dual_bound**2
    )
    f_factor = max(
        8.0 * consts.c_p**2 / (consts.c_l * nu * (nu + consts.c_p**2 * da_inv)),
        2.0 * dt / (3.0 * nu),
    )
    return u_part + t_part + c_part + gamma_part + zeta_part + f_factor * f_dual_bound**2


# --- scalar ODE harness -----------------------------------------------------


def run_scalar_ode(
    scheme: str, lam: float, y0: float, t_end: float, dt: float
) -> tuple[np.ndarray, np.ndarray]:
    """Integrate y' = lam*y with exact-history seeding; returns (times, values).

    History levels below t=0 are seeded from the exact exponential so the
    measured error reflects the scheme's truncation constant alone.
    """
    n_steps = int(math.ceil(t_end / dt - 1e-12))
    if scheme == "blebdf":
        a = (5.0 / 3.0, -5.0 / 2.0, 1.0, -1.0 / 6.0)
    elif scheme == "bdf2":
        a = (3.0 / 2.0, -2.0, 0.5, 0.0)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")
    y = [y0 * math.exp(lam * k * dt) for k in (0, -1, -2)]
    times = np.empty(n_steps + 1)
    values = np.empty(n_steps + 1)
    times[0], values[0] = 0.0, y0
    for k in range(n_steps):
        new = -(a[1] * y[0] + a[2] * y[1] + a[3] * y[2]) / (a[0] - lam * dt)
        y = [new, y[0], y[1]]
        times[k + 1] = (k + 1) * dt
        values[k + 1] = new
    return times, values


def ode_error_constant_ratio(
    lam: float, y0: float, t_end: float, dts: Sequence[float]
) -> list[tuple[float, float]]:
    """Max-error ratio blended/two-step per time step size.

    The blended stencil's truncation constant is half the two-step one, so
    the ratio tends to 1/2 as dt -> 0.
    """
    if lam >= 0.0:
        raise ValueError("decay rate lam must be negative")
    out = []
    for dt in dts:
        errors = {}
        for scheme in ("blebdf", "bdf2"):
            times, values = run_scalar_ode(scheme, lam, y0, t_end, dt)
            exact = y0 * np.exp(lam * times)
            errors[scheme] = float(np.abs(values - exact).max())
        out.append((dt, errors["blebdf"] / errors["bdf2"]))
    return out
