"""Traveling-wave profile construction by saddle-point shooting.

After one integration in the co-moving frame, a profile ``(V, U)(xi)``
connecting the end states solves the planar system

    V' = W
    W' = (V^5 / kappa) * [ -mu s W / V + 5 kappa W^2 / (2 V^6)
                           + s (a1 - s V) - p(V) - a2 ]

with the velocity slaved algebraically through ``U = a1 - s V``.  The back
state ``(v_minus, 0)`` is a saddle and the front state ``(v_plus, 0)`` is
attracting, so the connecting orbit is the branch of the one-dimensional
unstable manifold that leaves the saddle with ``W > 0``.  We integrate that
branch with a stiff adaptive integrator, recenter so that ``V(0)`` is the
midpoint volume, and resample onto a uniform grid whose exponential tails
are completed with the linearized manifolds on either side.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.integrate import cumulative_trapezoid, solve_ivp
from scipy.interpolate import CubicSpline, PchipInterpolator

from .errors import (
    InconsistentParamsError,
    MonotonicityError,
    OvershootError,
    ProfileError,
    TailFitError,
)
from .model import ModelParams

__all__ = [
    "ShockProfile",
    "compute_first_integrals",
    "profile_ode_rhs",
    "equilibrium_eigenvalues",
    "solve_profile",
    "evaluate_profile",
    "estimate_decay_rate",
]

#: |V - v_plus| + |W| threshold (times delta) at which the orbit counts
#: as having arrived at the front state.
ARRIVAL_TOL = 1e-8

#: Overshoot guard (times delta) past the front volume.
OVERSHOOT_TOL = 1e-3

#: Default number of uniform resampling nodes.  Odd so that xi = 0 is a
#: node and the midpoint normalization V(0) = (v_minus + v_plus)/2 is exact.
DEFAULT_SAMPLES = 4097


def compute_first_integrals(params: ModelParams) -> tuple[float, float]:
    """Integration constants ``(a1, a2)`` of the profile equations.

    Both are computed from each end state independently; a mismatch beyond
    relative ``1e-12`` means the params do not satisfy the jump conditions.
    """
    a1_minus = params.s * params.v_minus + params.u_minus
    a1_plus = params.s * params.v_plus + params.u_plus
    a2_minus = params.s * params.u_minus - float(params.pressure(params.v_minus))
    a2_plus = params.s * params.u_plus - float(params.pressure(params.v_plus))
    if abs(a1_minus - a1_plus) > 1e-12 * max(abs(a1_minus), abs(a1_plus), 1.0):
        raise InconsistentParamsError(
            f"a1 mismatch between end states: {a1_minus!r} vs {a1_plus!r}"
        )
    if abs(a2_minus - a2_plus) > 1e-12 * max(abs(a2_minus), abs(a2_plus), 1.0):
        raise InconsistentParamsError(
            f"a2 mismatch between end states: {a2_minus!r} vs {a2_plus!r}"
        )
    return a1_minus, a2_minus


def profile_ode_rhs(params: ModelParams, a1: float, a2: float, state):
    """Right-hand side ``(V', W')`` of the planar profile system.

    ``state`` is a pair ``(V, W)`` of floats or broadcastable arrays with
    ``V > 0``.
    """
    v, w = state
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    s = params.s
    bracket = (
        -params.mu * s * w / v
        + 2.5 * params.kappa * w * w / v**6
        + s * (a1 - s * v)
        - params.pressure(v)
        - a2
    )
    return w, (v**5 / params.kappa) * bracket


def equilibrium_eigenvalues(params: ModelParams, at: str) -> tuple[complex, complex]:
    """Eigenvalues of the profile system linearized at an end state.

    The linearization at ``(v, 0)`` is ``[[0, 1], [b, a]]`` with
    ``b = (v^5/kappa) (-s^2 - p'(v))`` and ``a = -mu s v^4 / kappa``, giving
    eigenvalues ``(a +/- sqrt(a^2 + 4 b)) / 2``.

    Parameters
    ----------
    at : {"minus", "plus"}
        Which end state to linearize at.  At ``v_minus`` the entropy
        condition makes ``b > 0`` (saddle); at ``v_plus`` it makes
        ``b < 0`` (attracting node or spiral).

    Returns
    -------
    (complex, complex)
        The ``+`` and ``-`` root, in that order.
    """
    if at == "minus":
        v = params.v_minus
    elif at == "plus":
        v = params.v_plus
    else:
        raise ValueError(f"at must be 'minus' or 'plus', got {at!r}")
    b = (v**5 / params.kappa) * (-params.s**2 - float(params.pressure.dp(v)))
    a = -params.mu * params.s * v**4 / params.kappa
    disc = a * a + 4.0 * b
    root = np.sqrt(complex(disc))
    return (complex(0.5 * (a + root)), complex(0.5 * (a - root)))


@dataclass(eq=False)
class ShockProfile:
    """Resampled connecting orbit plus fitted tail data.

    Arrays are aligned with the uniform grid ``xi`` on
    ``[-xi_half_width, +xi_half_width]``; ``Vp`` and ``Vpp`` are the first
    and second derivatives of ``V``.  ``U`` satisfies ``U = a1 - s V``
    exactly.  Outside the stored window the profile is flat to better than
    ``1e-8 * delta`` and evaluation clamps to the end states.
    """

    params: ModelParams
    a1: float
    a2: float
    xi: np.ndarray
    V: np.ndarray
    U: np.ndarray
    Vp: np.ndarray
    Vpp: np.ndarray
    c1_left: float
    c1_right: float

    @property
    def xi_half_width(self) -> float:
        return float(self.xi[-1])

    @property
    def c1_hat(self) -> float:
        """Binding (smaller) fitted tail decay rate."""
        return min(self.c1_left, self.c1_right)

    @cached_property
    def _interp_V(self) -> PchipInterpolator:
        return PchipInterpolator(self.xi, self.V, extrapolate=False)

    @cached_property
    def _interp_Vp(self) -> PchipInterpolator:
        return PchipInterpolator(self.xi, self.Vp, extrapolate=False)

    @cached_property
    def _interp_Vpp(self) -> PchipInterpolator:
        return PchipInterpolator(self.xi, self.Vpp, extrapolate=False)

    @cached_property
    def _u_antiderivative(self) -> CubicSpline:
        # Antiderivative of U from the left edge, on a fine uniform grid.
        # Cumulative trapezoid with the Euler-Maclaurin endpoint correction
        # keeps the quadrature error at the 1e-13 level.
        n = (1 << 17) + 1
        zeta = np.linspace(self.xi[0], self.xi[-1], n)
        h = zeta[1] - zeta[0]
        s = self.params.s
        u_fine = self.a1 - s * self._interp_V(zeta)
        up_fine = -s * self._interp_Vp(zeta)
        raw = np.concatenate(([0.0], cumulative_trapezoid(u_fine, dx=h)))
        corrected = raw - (h * h / 12.0) * (up_fine - up_fine[0])
        return CubicSpline(
            zeta, corrected, bc_type=((1, u_fine[0]), (1, u_fine[-1]))
        )

    def u_tail_integral(self, zeta):
        """``int_{-inf}^{zeta} U`` with ``U`` clamped to 0 left of the window.

        The back-state velocity is 0, so the integral converges; right of
        the window it grows linearly with slope ``u_plus``.
        """
        z = np.asarray(zeta, dtype=float)
        lo, hi = self.xi[0], self.xi[-1]
        core = self._u_antiderivative(np.clip(z, lo, hi))
        out = np.where(z <= lo, 0.0, core)
        out = out + np.where(z > hi, self.params.u_plus * (z - hi), 0.0)
        return float(out) if np.ndim(zeta) == 0 else out


def _fit_tail_rate(xi_abs: np.ndarray, deviation: np.ndarray) -> float:
    """Least-squares decay rate of ``deviation ~ exp(-rate * xi_abs)``.

    Samples already lost to rounding (below 1e-14) are dropped; at least 8
    must survive for the fit to mean anything.
    """
    mask = deviation > 1e-14
    if int(mask.sum()) < 8:
        raise TailFitError(
            f"only {int(mask.sum())} usable tail samples (need >= 8)"
        )
    slope = np.polyfit(xi_abs[mask], np.log(deviation[mask]), 1)[0]
    rate = -float(slope)
    if rate <= 0.0:
        raise TailFitError(f"tail does not decay (fitted rate {rate:.3e})")
    return rate


def estimate_decay_rate(profile: ShockProfile) -> tuple[float, float]:
    """Fitted exponential decay rates of the two tails of ``V``.

    Fits ``log |V - v_end|`` against ``|xi|`` over the outer quarter of each
    side of the stored window and returns ``(left_rate, right_rate)``.
    """
    xi = profile.xi
    half = profile.xi_half_width
    left = xi <= -0.75 * half
    right = xi >= 0.75 * half
    rate_left = _fit_tail_rate(
        -xi[left], np.abs(profile.V[left] - profile.params.v_minus)
    )
    rate_right = _fit_tail_rate(
        xi[right], np.abs(profile.V[right] - profile.params.v_plus)
    )
    return rate_left, rate_right


def _predicted_rates(params: ModelParams) -> tuple[float, float]:
    # Linearized decay rates: unstable eigenvalue at the saddle, slowest
    # stable real part at the front state.
    lam_p, lam_m = equilibrium_eigenvalues(params, "minus")
    left = max(lam_p.real, lam_m.real)
    lam_p, lam_m = equilibrium_eigenvalues(params, "plus")
    right = -max(lam_p.real, lam_m.real)
    if left <= 0.0 or right <= 0.0:
        raise ProfileError(
            "end-state linearization has the wrong stability pattern; "
            "params are not a compressive 2-shock"
        )
    return left, right


def solve_profile(
    params: ModelParams,
    xi_half_width: float | None = None,
    ode_tol: float = 1e-10,
    eps_init: float | None = None,
    samples: int = DEFAULT_SAMPLES,
) -> ShockProfile:
    """Construct the monotone connecting profile for validated shock data.

    Parameters
    ----------
    params : ModelParams
        End states and coefficients (see :func:`solve_rankine_hugoniot`).
    xi_half_width : float, optional
        Half-width of the resampling window.  Defaults to
        ``1.1 * ln(1e8) / c1`` with ``c1`` the slower predicted tail rate,
        so the stored tails sit below ``1e-8`` relative to the amplitude.
    ode_tol : float
        Relative tolerance of the orbit integration.
    eps_init : float, optional
        Distance from the saddle along the unstable eigenvector at which the
        shooting starts.  Defaults to ``1e-6 * delta``.
    samples : int
        Number of uniform resampling nodes; made odd if necessary so that
        ``xi = 0`` is a node.

    Raises
    ------
    MonotonicityError
        If the orbit loses ``V' > 0`` before arrival.
    OvershootError
        If the orbit overshoots ``v_plus`` (spiral approach; expected when
        :func:`~nskshock.model.profile_existence_margin` is violated badly).
    ProfileError
        For stalled integration or failed endpoint checks.
    """
    params.validate()
    delta = params.delta
    a1, a2 = compute_first_integrals(params)
    rate_left_pred, rate_right_pred = _predicted_rates(params)

    if xi_half_width is None:
        xi_half_width = 1.1 * np.log(1e8) / min(rate_left_pred, rate_right_pred)
    if eps_init is None:
        eps_init = 1e-6 * delta
    if samples < 513:
        raise ValueError(f"samples too small for tail fits: {samples}")
    if samples % 2 == 0:
        samples += 1

    v_minus, v_plus = params.v_minus, params.v_plus
    v_mid = 0.5 * (v_minus + v_plus)
    arrival = ARRIVAL_TOL * delta

    def rhs(_t, y):
        dv, dw = profile_ode_rhs(params, a1, a2, (y[0], y[1]))
        return (float(dv), float(dw))

    # Unit unstable eigenvector (components positive): (1, lambda_plus).
    evec = np.array([1.0, rate_left_pred])
    evec /= np.hypot(*evec)
    y_start = np.array([v_minus, 0.0]) + eps_init * evec

    def ev_mid(_t, y):
        return y[0] - v_mid

    ev_mid.terminal = True
    ev_mid.direction = 1.0

    def ev_turn(_t, y):
        return y[1]

    ev_turn.terminal = True
    ev_turn.direction = -1.0

    def ev_overshoot(_t, y):
        return y[0] - (v_plus + OVERSHOOT_TOL * delta)

    ev_overshoot.terminal = True
    ev_overshoot.direction = 1.0

    def ev_arrive(_t, y):
        return abs(y[0] - v_plus) + abs(y[1]) - arrival

    ev_arrive.terminal = True
    ev_arrive.direction = -1.0

    atol = 1e-12 * delta
    span_a = 4.0 * (np.log(delta / eps_init) + 20.0) / rate_left_pred

    sol_a = solve_ivp(
        rhs,
        (0.0, span_a),
        y_start,
        method="Radau",
        rtol=ode_tol,
        atol=atol,
        dense_output=True,
        events=(ev_mid, ev_turn),
    )
    if sol_a.t_events[1].size:
        raise MonotonicityError(
            "V' reached zero below the midpoint volume; no monotone profile"
        )
    if not sol_a.t_events[0].size:
        raise ProfileError("orbit never reached the midpoint volume")
    t_mid = float(sol_a.t_events[0][0])
    w_mid = float(sol_a.sol(t_mid)[1])

    sol_b = solve_ivp(
        rhs,
        (0.0, xi_half_width),
        np.array([v_mid, w_mid]),
        method="Radau",
        rtol=ode_tol,
        atol=atol,
        dense_output=True,
        events=(ev_arrive, ev_turn, ev_overshoot),
    )
    if sol_b.t_events[2].size:
        raise OvershootError(
            "orbit overshot the front volume (spiral approach to v_plus)"
        )
    if sol_b.t_events[1].size:
        raise MonotonicityError("V' reached zero before arrival at v_plus")
    tau_end = float(sol_b.t_events[0][0]) if sol_b.t_events[0].size else xi_half_width

    xi = np.linspace(-xi_half_width, xi_half_width, samples)
    V = np.empty_like(xi)
    W = np.empty_like(xi)

    # Left of the shooting start the orbit is the linearized unstable
    # manifold; the start point lies exactly on the eigenvector, so the
    # exponential continuation matches to O(eps_init^2).
    m_ext_l = xi < -t_mid
    g = np.exp(rate_left_pred * (xi[m_ext_l] + t_mid))
    V[m_ext_l] = v_minus + eps_init * evec[0] * g
    W[m_ext_l] = eps_init * evec[1] * g

    m_a = (~m_ext_l) & (xi <= 0.0)
    ya = sol_a.sol(xi[m_a] + t_mid)
    V[m_a], W[m_a] = ya[0], ya[1]

    m_b = (xi > 0.0) & (xi <= tau_end)
    yb = sol_b.sol(xi[m_b])
    V[m_b], W[m_b] = yb[0], yb[1]

    m_ext_r = xi > tau_end
    if np.any(m_ext_r):
        y_arr = sol_b.sol(tau_end)
        lam_slow = -rate_right_pred
        g = np.exp(lam_slow * (xi[m_ext_r] - tau_end))
        V[m_ext_r] = v_plus - (v_plus - float(y_arr[0])) * g
        W[m_ext_r] = float(y_arr[1]) * g

    # Pin the recentered midpoint exactly; the event root is already within
    # integrator tolerance of it.
    V[samples // 2] = v_mid
    W[samples // 2] = w_mid

    if abs(V[0] - v_minus) > 1e-6 * delta or abs(V[-1] - v_plus) > 1e-6 * delta:
        raise ProfileError(
            "stored window too narrow: profile tails not flat at the edges"
        )
    dV = np.diff(V)
    if not np.all(dV > 0.0):
        raise MonotonicityError(
            f"resampled profile not strictly increasing ({int((dV <= 0).sum())} bad gaps)"
        )

    U = a1 - params.s * V
    _, Vpp = profile_ode_rhs(params, a1, a2, (V, W))

    prof = ShockProfile(
        params=params,
        a1=a1,
        a2=a2,
        xi=xi,
        V=V,
        U=U,
        Vp=W,
        Vpp=np.asarray(Vpp),
        c1_left=np.nan,
        c1_right=np.nan,
    )
    prof.c1_left, prof.c1_right = estimate_decay_rate(prof)
    return prof


def evaluate_profile(profile: ShockProfile, xi):
    """Evaluate ``(V, U, V', V'')`` at arbitrary positions.

    Inside the stored window this uses shape-preserving (monotone) cubic
    interpolation through the samples; outside, the exact end states with
    zero derivatives.  Scalar input returns floats, array input arrays.
    """
    scalar = np.ndim(xi) == 0
    z = np.atleast_1d(np.asarray(xi, dtype=float))
    lo, hi = profile.xi[0], profile.xi[-1]
    inside = (z >= lo) & (z <= hi)

    V = np.where(z < lo, profile.params.v_minus, profile.params.v_plus)
    Vp = np.zeros_like(z)
    Vpp = np.zeros_like(z)
    if np.any(inside):
        zi = z[inside]
        V[inside] = profile._interp_V(zi)
        Vp[inside] = profile._interp_Vp(zi)
        Vpp[inside] = profile._interp_Vpp(zi)
    U = profile.a1 - profile.params.s * V
    if scalar:
        return float(V[0]), float(U[0]), float(Vp[0]), float(Vpp[0])
    return V, U, Vp, Vpp
