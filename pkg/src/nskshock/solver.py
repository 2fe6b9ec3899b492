"""Implicit method-of-lines solver for the half-line wall problem.

Space is discretized on uniform nodes ``x_j = j dx`` with second-order
flux-form differences.  The wall carries ``u(0) = 0`` and a zero volume
gradient, encoded through reflection ghosts (``v`` even, ``u`` odd); the
far edge is pinned to the state's own initial edge values, which equal the
front state for shock runs.  Time stepping is the trapezoidal
(Crank-Nicolson) rule solved by a damped Newton iteration with an analytic
banded Jacobian; a finite-difference Jacobian can be switched on as a
cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .errors import (
    ConfigError,
    CorridorError,
    PositivityError,
    StepFailure,
    TailTruncationError,
)
from .model import ModelParams
from .profile import ShockProfile, evaluate_profile

__all__ = [
    "Grid",
    "SolverConfig",
    "FieldState",
    "Perturbation",
    "make_initial_data",
    "semidiscrete_rhs",
    "step",
    "run",
]

# Banded Jacobian geometry for interleaved (v_0, u_0, v_1, u_1, ...)
# ordering: the widest coupling is u_j on v_{j +/- 2} through the
# twice-differentiated capillary term.
_L_BAND = 5
_U_BAND = 3


@dataclass(frozen=True)
class Grid:
    """Uniform nodes ``x_j = j L / N`` for ``j = 0..N``."""

    L: float
    N: int

    def __post_init__(self):
        if not (self.L > 0.0):
            raise ConfigError(f"grid length must be positive, got {self.L}")
        if self.N < 64:
            raise ConfigError(f"need at least 64 cells, got N={self.N}")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(0.0, self.L, self.N + 1)


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_final: float
    theta: float = 0.5
    newton_tol: float = 1e-10
    newton_max_iter: int = 25
    fd_jacobian: bool = False

    def __post_init__(self):
        if not (self.dt > 0.0):
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if self.t_final < 0.0:
            raise ConfigError(f"t_final must be >= 0, got {self.t_final}")
        if not (0.5 <= self.theta <= 1.0):
            raise ConfigError(f"theta must lie in [0.5, 1], got {self.theta}")
        if self.newton_max_iter < 1:
            raise ConfigError("newton_max_iter must be >= 1")


@dataclass
class FieldState:
    """Nodal fields at one time level."""

    t: float
    v: np.ndarray
    u: np.ndarray

    def check_corridor(self, params: ModelParams) -> None:
        lo = 0.5 * params.v_minus
        hi = 1.5 * params.v_plus
        vmin = float(self.v.min())
        vmax = float(self.v.max())
        if vmin < lo or vmax > hi:
            raise CorridorError(
                f"v left corridor [{lo:.6g}, {hi:.6g}] at t={self.t:.6g} "
                f"(min {vmin:.6g}, max {vmax:.6g})"
            )


@dataclass(frozen=True)
class Perturbation:
    """Additive Gaussian disturbance on the initial data.

    The bump always enters the volume field; ``u_factor`` optionally adds
    ``u_factor * amplitude`` times the same Gaussian to the velocity
    (``u_factor = -s`` aligns the disturbance with the incoming shock
    family, so almost nothing radiates toward the wall).
    """

    kind: str = "none"
    amplitude: float = 0.0
    center: float = 0.0
    width: float = 1.0
    u_factor: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "bump"):
            raise ConfigError(f"unknown perturbation kind {self.kind!r}")
        if self.kind == "bump" and not (self.width > 0.0):
            raise ConfigError("bump width must be positive")


def make_initial_data(
    grid: Grid,
    profile: ShockProfile,
    beta: float,
    perturbation: Perturbation = Perturbation(),
    alpha0: float = 0.0,
) -> FieldState:
    """Profile-plus-disturbance initial data compatible with the wall.

    The volume field is ``V(x + alpha0 - beta)`` plus an optional Gaussian
    bump (cut to exact zero beyond eight widths).  The velocity field is the
    translated profile minus ``U(alpha0 - beta) * exp(-c1 x)``, which makes
    ``u(0) = 0`` exact while decaying at the profile's own tail rate; the
    bump adds ``u_factor`` times itself there as well.

    Raises
    ------
    ConfigError
        If the bump amplitude exceeds ``0.1 * delta`` (corridor guard).
    TailTruncationError
        If the grid is too short for the data to be flat at the far edge.
    """
    params = profile.params
    delta = params.delta
    x = grid.x
    V, U, _, _ = evaluate_profile(profile, x + (alpha0 - beta))
    v0 = V.copy()
    _, u_wall, _, _ = evaluate_profile(profile, alpha0 - beta)
    u0 = U - u_wall * np.exp(-profile.c1_hat * x)
    if perturbation.kind == "bump":
        a, c, w = perturbation.amplitude, perturbation.center, perturbation.width
        if abs(a) > 0.1 * delta:
            raise ConfigError(
                f"bump amplitude {a:.3e} exceeds the corridor guard "
                f"0.1*delta = {0.1 * delta:.3e}"
            )
        arg = (x - c) / w
        bump = np.where(np.abs(arg) <= 8.0, a * np.exp(-(arg**2)), 0.0)
        v0 = v0 + bump
        if perturbation.u_factor != 0.0:
            u0 = u0 + perturbation.u_factor * bump
            if u0[0] != 0.0:
                raise ConfigError(
                    "velocity bump reaches the wall; move it right or drop "
                    "the u component (wall needs u(0) = 0)"
                )

    # Far edge must already carry the front state to rounding accuracy;
    # snap it exactly so the Dirichlet pin is clean.
    if abs(v0[-1] - params.v_plus) > 1e-10 * max(1.0, params.v_plus) or abs(
        u0[-1] - params.u_plus
    ) > 1e-10 * max(1.0, abs(params.u_plus)):
        raise TailTruncationError(
            "initial data not flat at the far edge; enlarge L or beta margin"
        )
    v0[-1] = params.v_plus
    u0[-1] = params.u_plus
    u0[0] = 0.0
    return FieldState(t=0.0, v=v0, u=u0)


# ---------------------------------------------------------------------------
# Spatial operator


def _korteweg_nodes(v: np.ndarray, dx: float):
    """Capillary scalar K and its gradient stencils at every node.

    Interior nodes use central differences.  Node 0 uses the even
    reflection ghost (v_{-1} = v_1), which kills the odd first difference;
    node N uses one-sided second-order differences so no ghost is needed
    past the pinned edge.
    """
    n = v.size
    d1 = np.empty(n)
    d2 = np.empty(n)
    d1[1:-1] = (v[2:] - v[:-2]) / (2.0 * dx)
    d2[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (dx * dx)
    d1[0] = 0.0
    d2[0] = 2.0 * (v[1] - v[0]) / (dx * dx)
    # One-sided edge stencils in telescoped difference form, so that they
    # vanish exactly (not just to rounding) on constant fields.
    d1[-1] = (3.0 * (v[-1] - v[-2]) - (v[-2] - v[-3])) / (2.0 * dx)
    d2[-1] = (
        2.0 * (v[-1] - v[-2]) - 3.0 * (v[-2] - v[-3]) + (v[-3] - v[-4])
    ) / (dx * dx)
    K = -d2 / v**5 + 2.5 * d1 * d1 / v**6
    return K, d1, d2


def semidiscrete_rhs(
    v: np.ndarray, u: np.ndarray, grid: Grid, params: ModelParams
):
    """Flux-form spatial operator ``(v_t, u_t)`` on the nodes.

    Rows owned by boundary conditions (``u_0`` and both far-edge pins) are
    returned as zero.
    """
    if np.any(v <= 0.0):
        raise PositivityError("non-positive volume in spatial operator")
    dx = grid.dx
    K, _, _ = _korteweg_nodes(v, dx)

    vbar = 0.5 * (v[:-1] + v[1:])
    dud = (u[1:] - u[:-1]) / dx
    F = -params.pressure(vbar) + params.mu * dud / vbar + params.kappa * 0.5 * (
        K[:-1] + K[1:]
    )

    rhs_v = np.zeros_like(v)
    rhs_u = np.zeros_like(u)
    rhs_v[0] = u[1] / dx  # flux form with the odd ghost u_{-1} = -u_1
    rhs_v[1:-1] = (u[2:] - u[:-2]) / (2.0 * dx)
    rhs_u[1:-1] = (F[1:] - F[:-1]) / dx
    return rhs_v, rhs_u


def _interleave(v: np.ndarray, u: np.ndarray) -> np.ndarray:
    z = np.empty(v.size + u.size)
    z[0::2] = v
    z[1::2] = u
    return z


class _Banded:
    """Accumulator for LAPACK banded storage ab[u + r - c, c]."""

    def __init__(self, m: int):
        self.ab = np.zeros((_L_BAND + _U_BAND + 1, m))

    def add(self, rows, cols, vals):
        np.add.at(self.ab, (_U_BAND + rows - cols, cols), vals)


def _jacobian_rhs_banded(
    v: np.ndarray, u: np.ndarray, grid: Grid, params: ModelParams
) -> np.ndarray:
    """Analytic Jacobian of :func:`semidiscrete_rhs` in banded storage."""
    n = v.size - 1  # nodes 0..n
    dx = grid.dx
    mu, kappa = params.mu, params.kappa
    K, d1, d2 = _korteweg_nodes(v, dx)

    vbar = 0.5 * (v[:-1] + v[1:])
    dud = (u[1:] - u[:-1]) / dx
    dpbar = params.pressure.dp(vbar)

    # F-midpoint sensitivities (non-capillary part).
    dF_dv = -0.5 * dpbar - 0.5 * mu * dud / vbar**2  # wrt either neighbor v
    dF_du = mu / (dx * vbar)  # wrt u_right; negated for u_left

    B = _Banded(2 * (n + 1))
    iv = lambda j: 2 * j  # noqa: E731
    iu = lambda j: 2 * j + 1  # noqa: E731

    # v rows: v_t,0 = u_1/dx; v_t,j = (u_{j+1} - u_{j-1}) / 2dx.
    B.add(np.array([0]), np.array([iu(1)]), np.array([1.0 / dx]))
    j = np.arange(1, n)
    B.add(iv(j), iu(j + 1), np.full(j.size, 0.5 / dx))
    B.add(iv(j), iu(j - 1), np.full(j.size, -0.5 / dx))

    # u rows, pressure + viscous flux parts.
    B.add(iu(j), iv(j - 1), -dF_dv[j - 1] / dx)
    B.add(iu(j), iv(j), (dF_dv[j] - dF_dv[j - 1]) / dx)
    B.add(iu(j), iv(j + 1), dF_dv[j] / dx)
    B.add(iu(j), iu(j - 1), dF_du[j - 1] / dx)
    B.add(iu(j), iu(j), -(dF_du[j] + dF_du[j - 1]) / dx)
    B.add(iu(j), iu(j + 1), dF_du[j] / dx)

    # Capillary part: rhs_u[j] += kappa (K_{j+1} - K_{j-1}) / (2 dx).
    ck = kappa / (2.0 * dx)
    v5 = v**5
    v6 = v**6
    v7 = v6 * v
    km1 = -1.0 / (dx * dx * v5) - 5.0 * d1 / (2.0 * dx * v6)
    kp1 = -1.0 / (dx * dx * v5) + 5.0 * d1 / (2.0 * dx * v6)
    k0 = 2.0 / (dx * dx * v5) + 5.0 * d2 / v6 - 15.0 * d1 * d1 / v7

    ji = np.arange(1, n - 1)  # rows whose K_{j+1} stencil is interior
    B.add(iu(ji), iv(ji), ck * km1[ji + 1])
    B.add(iu(ji), iv(ji + 1), ck * k0[ji + 1])
    B.add(iu(ji), iv(ji + 2), ck * kp1[ji + 1])
    jj = np.arange(2, n)  # rows whose K_{j-1} stencil is interior
    B.add(iu(jj), iv(jj - 2), -ck * km1[jj - 1])
    B.add(iu(jj), iv(jj - 1), -ck * k0[jj - 1])
    B.add(iu(jj), iv(jj), -ck * kp1[jj - 1])

    # Row j=1 couples to the wall stencil K_0 (even ghost, d1 = 0).
    dk0_dv0 = 2.0 / (dx * dx * v5[0]) + 5.0 * d2[0] / v6[0]
    dk0_dv1 = -2.0 / (dx * dx * v5[0])
    B.add(
        np.array([iu(1), iu(1)]),
        np.array([iv(0), iv(1)]),
        np.array([-ck * dk0_dv0, -ck * dk0_dv1]),
    )

    # Row j=n-1 couples to the one-sided stencil K_n.
    dkn = {
        0: -2.0 / (dx * dx * v5[n]) + 5.0 * d1[n] / v6[n] * (1.5 / dx)
        + 5.0 * d2[n] / v6[n] - 15.0 * d1[n] ** 2 / v7[n],
        1: 5.0 / (dx * dx * v5[n]) - 10.0 * d1[n] / (dx * v6[n]),
        2: -4.0 / (dx * dx * v5[n]) + 5.0 * d1[n] / (2.0 * dx * v6[n]),
        3: 1.0 / (dx * dx * v5[n]),
    }
    B.add(
        np.full(4, iu(n - 1)),
        np.array([iv(n), iv(n - 1), iv(n - 2), iv(n - 3)]),
        np.array([ck * dkn[0], ck * dkn[1], ck * dkn[2], ck * dkn[3]]),
    )
    return B.ab


def _fd_jacobian_rhs_banded(
    v: np.ndarray, u: np.ndarray, grid: Grid, params: ModelParams
) -> np.ndarray:
    """Finite-difference Jacobian of the spatial operator (cross-check).

    Columns are colored with stride 9: a column c touches rows c-3..c+5
    only, so each row sees exactly one perturbed column per color.
    """
    z = _interleave(v, u)
    m = z.size
    ab = np.zeros((_L_BAND + _U_BAND + 1, m))

    def g(zz):
        gv, gu = semidiscrete_rhs(zz[0::2], zz[1::2], grid, params)
        return _interleave(gv, gu)

    for color in range(9):
        idx = np.arange(color, m, 9)
        h = 1e-7 * np.maximum(1.0, np.abs(z[idx]))
        zp = z.copy()
        zp[idx] += h
        zm = z.copy()
        zm[idx] -= h
        dg = g(zp) - g(zm)
        for off in range(-_U_BAND, _L_BAND + 1):
            r = idx + off
            ok = (r >= 0) & (r < m)
            ab[_U_BAND + off, idx[ok]] = dg[r[ok]] / (2.0 * h[ok])
    return ab


def step(
    state: FieldState,
    dt: float,
    grid: Grid,
    params: ModelParams,
    config: SolverConfig,
) -> FieldState:
    """One theta-weighted implicit step with damped Newton.

    The wall row pins ``u_0 = 0`` and the far edge pins ``(v_N, u_N)`` to
    their incoming values.  Raises :class:`StepFailure` if Newton stalls or
    positivity cannot be maintained by at most ten update halvings.
    """
    z_old = _interleave(state.v, state.u)
    g_v, g_u = semidiscrete_rhs(state.v, state.u, grid, params)
    g_old = _interleave(g_v, g_u)
    pin_v, pin_u = state.v[-1], state.u[-1]
    theta = config.theta
    scale = max(1.0, float(np.max(np.abs(z_old))))
    tol = config.newton_tol * scale

    z = z_old.copy()
    for it in range(config.newton_max_iter + 1):
        v = z[0::2]
        u = z[1::2]
        gv, gu = semidiscrete_rhs(v, u, grid, params)
        R = z - z_old - dt * (theta * _interleave(gv, gu) + (1.0 - theta) * g_old)
        R[1] = u[0]
        R[-2] = v[-1] - pin_v
        R[-1] = u[-1] - pin_u
        if float(np.max(np.abs(R))) < tol:
            return FieldState(t=state.t + dt, v=v.copy(), u=u.copy())
        if it == config.newton_max_iter:
            raise StepFailure(
                f"Newton stalled after {it} iterations "
                f"(residual {float(np.max(np.abs(R))):.3e})",
                state.t,
            )
        if config.fd_jacobian:
            ab = _fd_jacobian_rhs_banded(v, u, grid, params)
        else:
            ab = _jacobian_rhs_banded(v, u, grid, params)
        ab = -dt * theta * ab
        ab[_U_BAND, :] += 1.0
        delta = solve_banded((_L_BAND, _U_BAND), ab, -R)

        lam = 1.0
        halvings = 0
        while np.any(z[0::2] + lam * delta[0::2] <= 0.0):
            if halvings == 10:
                raise StepFailure(
                    "positivity lost; damped line search exhausted", state.t
                )
            lam *= 0.5
            halvings += 1
        z = z + lam * delta
        z[1] = 0.0
        z[-2] = pin_v
        z[-1] = pin_u
    raise AssertionError("unreachable")


def run(
    grid: Grid,
    params: ModelParams,
    config: SolverConfig,
    state: FieldState,
    observers: Sequence[Callable[[int, FieldState], None]] = (),
    observe_every: int = 1,
) -> FieldState:
    """Advance from ``t = 0`` to ``t_final``, notifying observers.

    Observers fire at step 0, every ``observe_every``-th step, and at the
    final step.  On a failed step the interval is retried once as two half
    steps before the failure is allowed to propagate.
    """
    if state.u[0] != 0.0:
        raise ConfigError("initial data violates the wall condition u(0) = 0")
    state.check_corridor(params)
    for obs in observers:
        obs(0, state)
    if config.t_final == 0.0:
        return state

    n_full = int(np.floor(config.t_final / config.dt + 1e-12))
    remainder = config.t_final - n_full * config.dt
    dts = [config.dt] * n_full
    if remainder > 1e-12 * config.dt:
        dts.append(remainder)

    for i, dt_i in enumerate(dts, start=1):
        try:
            state = step(state, dt_i, grid, params, config)
        except StepFailure:
            half = 0.5 * dt_i
            state = step(state, half, grid, params, config)
            state = step(state, half, grid, params, config)
        state.t = min(i * config.dt, config.t_final)
        state.check_corridor(params)
        if i % observe_every == 0 or i == len(dts):
            for obs in observers:
                obs(i, state)
    return state
