"""End-state algebra for shock data of 1D viscous-capillary gas dynamics.

The model is isentropic gas dynamics in Lagrangian coordinates with a
Newtonian viscosity ``mu`` and a capillarity coefficient ``kappa``:

    v_t - u_x = 0
    u_t + p(v)_x = mu (u_x / v)_x + kappa (-v_xx / v^5 + 5 v_x^2 / (2 v^6))_x

with a gamma-law pressure ``p(v) = p0 * v**(-gamma)``.  This module holds
everything that is pure algebra on the two far-field states: solving the
jump conditions for the back state, characteristic speeds, the entropy
(compressivity) margins, and the sign condition that governs whether a
monotone connecting profile can exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    InconsistentParamsError,
    NotATwoShockError,
    VacuumExceededError,
)

__all__ = [
    "PressureLaw",
    "ModelParams",
    "char_speed",
    "solve_rankine_hugoniot",
    "lax_entropy_margin",
    "profile_existence_margin",
]

#: Relative tolerance used for the jump-condition closure checks.
RH_RTOL = 1e-12


@dataclass(frozen=True)
class PressureLaw:
    """Gamma-law pressure ``p(v) = p0 * v**(-gamma)``.

    Parameters
    ----------
    p0 : float
        Reference pressure, must be positive.
    gamma : float
        Adiabatic exponent, must be >= 1.

    The law is smooth with ``p > 0``, ``p' < 0`` and ``p'' > 0`` on
    ``v > 0``, which is all the downstream modules ever rely on.
    """

    p0: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if not (self.p0 > 0.0):
            raise ValueError(f"p0 must be positive, got {self.p0}")
        if not (self.gamma >= 1.0):
            raise ValueError(f"gamma must be >= 1, got {self.gamma}")

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        if np.any(v <= 0.0):
            raise ValueError("pressure law evaluated at non-positive v")
        return self.p0 * v ** (-self.gamma)

    def dp(self, v):
        """First derivative p'(v)."""
        v = np.asarray(v, dtype=float)
        if np.any(v <= 0.0):
            raise ValueError("pressure law evaluated at non-positive v")
        return -self.gamma * self.p0 * v ** (-self.gamma - 1.0)

    def d2p(self, v):
        """Second derivative p''(v)."""
        v = np.asarray(v, dtype=float)
        if np.any(v <= 0.0):
            raise ValueError("pressure law evaluated at non-positive v")
        return self.gamma * (self.gamma + 1.0) * self.p0 * v ** (-self.gamma - 2.0)


def char_speed(pressure: PressureLaw, v) -> np.ndarray | float:
    """Forward characteristic speed ``lambda_2(v) = sqrt(-p'(v))``.

    Raises
    ------
    ValueError
        If ``v`` is not strictly positive.
    """
    return np.sqrt(-pressure.dp(v))


@dataclass(frozen=True)
class ModelParams:
    """Validated shock data: end states, speed, and diffusive coefficients.

    Instances are normally produced by :func:`solve_rankine_hugoniot`, which
    guarantees the invariants checked by :meth:`validate`.  The back-state
    velocity is pinned to ``u_minus = 0`` throughout the package.
    """

    pressure: PressureLaw
    v_plus: float
    u_plus: float
    v_minus: float
    s: float
    mu: float
    kappa: float
    u_minus: float = field(default=0.0)

    @property
    def delta(self) -> float:
        """Shock amplitude ``v_plus - v_minus``."""
        return self.v_plus - self.v_minus

    def validate(self) -> None:
        """Check jump-condition closure and shock orientation.

        Raises
        ------
        InconsistentParamsError
            If either jump identity fails at relative tolerance ``1e-12``.
        NotATwoShockError
            If the ordering ``0 < v_minus < v_plus``, ``u_plus < u_minus``
            or the speed sign ``s > 0`` fails.
        ValueError
            If ``mu`` or ``kappa`` is not positive.
        """
        if not (self.mu > 0.0 and self.kappa > 0.0):
            raise ValueError("mu and kappa must be positive")
        if not (0.0 < self.v_minus < self.v_plus):
            raise NotATwoShockError(
                f"need 0 < v_minus < v_plus, got ({self.v_minus}, {self.v_plus})"
            )
        if not (self.u_plus < self.u_minus and self.s > 0.0):
            raise NotATwoShockError(
                f"need u_plus < u_minus and s > 0, got "
                f"u_plus={self.u_plus}, s={self.s}"
            )
        scale_u = max(abs(self.u_plus), abs(self.u_minus), 1e-300)
        r1 = self.s * (self.v_plus - self.v_minus) - (self.u_minus - self.u_plus)
        if abs(r1) > RH_RTOL * max(abs(self.s) * self.v_plus, scale_u):
            raise InconsistentParamsError(f"mass jump identity off by {r1:.3e}")
        p_p = float(self.pressure(self.v_plus))
        p_m = float(self.pressure(self.v_minus))
        r2 = self.s * (self.u_plus - self.u_minus) - (p_p - p_m)
        if abs(r2) > RH_RTOL * max(p_m, p_p):
            raise InconsistentParamsError(f"momentum jump identity off by {r2:.3e}")


def solve_rankine_hugoniot(
    pressure: PressureLaw,
    v_plus: float,
    u_plus: float,
    mu: float,
    kappa: float,
) -> ModelParams:
    """Solve the jump conditions for the back state of a compressive 2-shock.

    Given the front state ``(v_plus, u_plus)`` with ``u_plus < 0`` and the
    convention ``u_minus = 0``, the jump conditions reduce to a scalar
    equation for the back volume,

        (p(v) - p(v_plus)) * (v_plus - v) = u_plus**2,   0 < v < v_plus,

    whose left side is strictly decreasing in ``v``, so a bisection search
    is guaranteed to converge.  The shock speed follows as
    ``s = -u_plus / (v_plus - v_minus)``.

    Returns
    -------
    ModelParams
        Validated parameter bundle with ``lambda_2(v_plus) < s <
        lambda_2(v_minus)``.

    Raises
    ------
    NotATwoShockError
        If ``u_plus >= 0`` (no compressive 2-shock exists).
    VacuumExceededError
        If no back state with positive volume matches the data.
    """
    if not (v_plus > 0.0):
        raise ValueError(f"v_plus must be positive, got {v_plus}")
    if u_plus >= 0.0:
        raise NotATwoShockError(
            f"u_plus must be negative for a 2-shock with u_minus = 0, got {u_plus}"
        )

    p_plus = float(pressure(v_plus))
    target = u_plus * u_plus

    def gap(v: float) -> float:
        return (float(pressure(v)) - p_plus) * (v_plus - v) - target

    lo = 1e-12 * v_plus
    hi = v_plus * (1.0 - 1e-15)
    if not (gap(lo) > 0.0):
        # For a gamma law the pressure blows up toward vacuum, so this only
        # triggers for data too strong for the chosen law.
        raise VacuumExceededError(
            "jump data stronger than the pressure law supports (vacuum reached)"
        )
    # gap(hi) < 0 since gap(v_plus) = -u_plus^2.  The width test is relative
    # to the bracket itself, not v_plus: strong shocks push v_minus orders of
    # magnitude below v_plus and the momentum identity needs p(v_minus) to
    # machine accuracy there.
    while hi - lo > 1e-15 * hi:
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    v_minus = 0.5 * (lo + hi)
    s = -u_plus / (v_plus - v_minus)
    params = ModelParams(
        pressure=pressure,
        v_plus=float(v_plus),
        u_plus=float(u_plus),
        v_minus=float(v_minus),
        s=float(s),
        mu=float(mu),
        kappa=float(kappa),
    )
    params.validate()
    return params


def lax_entropy_margin(params: ModelParams) -> tuple[float, float]:
    """Entropy margins ``(s - lambda_2(v_plus), lambda_2(v_minus) - s)``.

    Both are positive exactly when the speed sits strictly between the
    forward characteristic speeds of the two end states, i.e. when the shock
    is a compressive 2-shock.
    """
    lam_plus = float(char_speed(params.pressure, params.v_plus))
    lam_minus = float(char_speed(params.pressure, params.v_minus))
    return (params.s - lam_plus, lam_minus - params.s)


def profile_existence_margin(params: ModelParams) -> float:
    """Sign condition controlling a monotone front-state approach.

    Returns the value of

        mu^2 s^2 v_minus^8 / kappa
            - (10 v_plus / v_minus - 6) * v_plus^5 * (p'(v_plus) + s^2),

    which is positive when viscosity dominates capillarity strongly enough
    that the orbit can enter the front state without spiraling.  Callers
    treat a non-positive value as a warning, not a hard error: the margin is
    sufficient, not necessary, for a monotone profile.
    """
    s2 = params.s * params.s
    first = params.mu**2 * s2 * params.v_minus**8 / params.kappa
    second = (
        (10.0 * params.v_plus / params.v_minus - 6.0)
        * params.v_plus**5
        * (float(params.pressure.dp(params.v_plus)) + s2)
    )
    return first - second


def _check_math_consistency() -> None:
    # Cheap self-check kept for interactive use; exercised properly in tests.
    law = PressureLaw()
    params = solve_rankine_hugoniot(law, 2.0, -math.sqrt(0.5), 10.0, 0.1)
    assert abs(params.v_minus - 1.0) < 1e-12
    assert abs(profile_existence_margin(params) - 388.0) < 1e-9


if __name__ == "__main__":  # pragma: no cover
    _check_math_consistency()
    print("model algebra self-check passed")
