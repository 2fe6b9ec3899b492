"""Stability diagnostics built on integrated perturbation variables.

The solver evolves ``(v, u)``; the stability theory lives one integration
up, in the antiderivatives ``phi`` and ``psi`` of the deviation from the
drifting reference front.  This module reconstructs those fields on the
grid, evaluates the Sobolev energies and dissipation integrals that appear
in the decay estimate, tracks the mass balance that determines the shift,
and accumulates the wall products whose time integrals the energy method
has to control.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .errors import AuditError
from .profile import evaluate_profile
from .shift import ShiftData, eval_A
from .solver import FieldState, Grid

__all__ = [
    "PerturbationFields",
    "compute_perturbation",
    "sobolev_norms",
    "sup_distance",
    "mass_balance_residual",
    "DiagnosticsRecord",
    "DiagnosticsAuditor",
    "theorem_bound_audit",
]

# Column order of the wall-product integrals in series output.
BOUNDARY_KEYS = (
    "ib_phi_psi",
    "ib_psi_psix",
    "ib_psix_phix",
    "ib_psit_psix",
    "ib_psix_psixx",
    "ib_psixt_psixx",
    "ib_phixx_psi",
    "ib_phix_phixx",
    "ib_phixx_psixx",
    "ib_psit_phixx",
)


@dataclass
class PerturbationFields:
    """Antiderivative perturbations and their spatial derivatives.

    ``phi`` carries derivatives through fourth order, ``psi`` through
    third; that is what the H3 x H2 energy plus its dissipation needs.
    ``Phi0``/``Psi0`` are the beta-only antiderivatives of the raw initial
    excess (no alpha shift), filled on request.
    """

    t: float
    phi: np.ndarray
    phi_x: np.ndarray
    phi_xx: np.ndarray
    phi_xxx: np.ndarray
    phi_xxxx: np.ndarray
    psi: np.ndarray
    psi_x: np.ndarray
    psi_xx: np.ndarray
    psi_xxx: np.ndarray
    tail_ok: bool
    Phi0: Optional[np.ndarray] = None
    Psi0: Optional[np.ndarray] = None


def _tail_anchored_antiderivative(f: np.ndarray, x: np.ndarray) -> np.ndarray:
    """``F(x) = -int_x^L f``, the antiderivative vanishing at the far edge."""
    c = cumulative_trapezoid(f, x, initial=0.0)
    return c - c[-1]


def compute_perturbation(
    state: FieldState,
    grid: Grid,
    shift: ShiftData,
    include_unshifted: bool = False,
) -> PerturbationFields:
    """Perturbation fields of ``state`` against the drifting front.

    The reference is the profile at ``x - s t + alpha - beta``.  First
    derivatives of ``phi`` and ``psi`` are the raw deviations themselves;
    higher ones come from repeated second-order gradients.
    """
    prof = shift.profile
    params = prof.params
    x = grid.x
    dx = grid.dx
    zeta = x - params.s * state.t + (shift.alpha - shift.beta)
    V, U, _, _ = evaluate_profile(prof, zeta)
    dv = state.v - V
    du = state.u - U
    tail_ok = abs(dv[-1]) <= 1e-8 and abs(du[-1]) <= 1e-8

    phi = _tail_anchored_antiderivative(dv, x)
    psi = _tail_anchored_antiderivative(du, x)
    phi_xx = np.gradient(dv, dx, edge_order=2)
    phi_xxx = np.gradient(phi_xx, dx, edge_order=2)
    phi_xxxx = np.gradient(phi_xxx, dx, edge_order=2)
    psi_xx = np.gradient(du, dx, edge_order=2)
    psi_xxx = np.gradient(psi_xx, dx, edge_order=2)

    fields = PerturbationFields(
        t=state.t,
        phi=phi,
        phi_x=dv,
        phi_xx=phi_xx,
        phi_xxx=phi_xxx,
        phi_xxxx=phi_xxxx,
        psi=psi,
        psi_x=du,
        psi_xx=psi_xx,
        psi_xxx=psi_xxx,
        tail_ok=tail_ok,
    )
    if include_unshifted:
        V0, U0, _, _ = evaluate_profile(prof, x - shift.beta)
        fields.Phi0 = _tail_anchored_antiderivative(state.v - V0, x)
        fields.Psi0 = _tail_anchored_antiderivative(state.u - U0, x)
    return fields


def sobolev_norms(fields: PerturbationFields, dx: float) -> dict:
    """Energy norms and the instantaneous dissipation integrand.

    Returns ``phi_h3`` and ``psi_h2`` (norms, not squares), the combined
    ``N = sqrt(phi_h3^2 + psi_h2^2)``, and ``diss``, the spatial integral
    of squared first-through-highest derivatives that is accumulated in
    time by the decay estimate.
    """

    def _sq(*arrays):
        return sum(float(np.trapezoid(a * a, dx=dx)) for a in arrays)

    phi_sq = _sq(fields.phi, fields.phi_x, fields.phi_xx, fields.phi_xxx)
    psi_sq = _sq(fields.psi, fields.psi_x, fields.psi_xx)
    diss = _sq(
        fields.phi_x,
        fields.phi_xx,
        fields.phi_xxx,
        fields.phi_xxxx,
        fields.psi_x,
        fields.psi_xx,
        fields.psi_xxx,
    )
    return {
        "phi_h3": np.sqrt(phi_sq),
        "psi_h2": np.sqrt(psi_sq),
        "N": np.sqrt(phi_sq + psi_sq),
        "diss": diss,
    }


def sup_distance(state: FieldState, grid: Grid, shift: ShiftData):
    """Sup-norm distance of ``(v, u)`` to the drifting front."""
    prof = shift.profile
    zeta = grid.x - prof.params.s * state.t + (shift.alpha - shift.beta)
    V, U, _, _ = evaluate_profile(prof, zeta)
    return float(np.max(np.abs(state.v - V))), float(np.max(np.abs(state.u - U)))


def mass_balance_residual(
    state: FieldState,
    initial: FieldState,
    grid: Grid,
    shift: ShiftData,
) -> float:
    """Defect in the integrated continuity balance.

    The excess volume relative to the drifting front changes only through
    the inflow the profile tail carries past the wall; with the shift in
    place the two sides agree identically in the continuum.
    """
    prof = shift.profile
    params = prof.params
    x = grid.x
    off = shift.alpha - shift.beta

    V_now, _, _, _ = evaluate_profile(prof, x - params.s * state.t + off)
    lhs = float(np.trapezoid(state.v - V_now, x))
    V_0, _, _, _ = evaluate_profile(prof, x + off)
    rhs = float(np.trapezoid(initial.v - V_0, x))
    rhs += (
        prof.u_tail_integral(off) - prof.u_tail_integral(-params.s * state.t + off)
    ) / params.s
    return lhs - rhs


@dataclass
class DiagnosticsRecord:
    """One series row: energies, sups, balances, wall products."""

    t: float
    phi_h3: float
    psi_h2: float
    N: float
    sup_v: float
    sup_u: float
    mass_res: float
    bres_phi0: float
    bres_psix0: float
    bres_phixx0: float
    C0_ratio: float
    diss_running: float
    boundary: dict = field(default_factory=dict)
    tail_ok: bool = True


class DiagnosticsAuditor:
    """Observer that turns solver states into diagnostic records.

    Wall products involving ``psi_t`` use backward differences between
    consecutive records, and all time integrals are running trapezoids at
    the record cadence, so the cadence sets their accuracy.
    """

    def __init__(self, grid: Grid, initial: FieldState, shift: ShiftData):
        self.grid = grid
        self.shift = shift
        self.initial = initial
        self.records: list[DiagnosticsRecord] = []
        self._denom = None
        self._diss_int = 0.0
        self._ib = dict.fromkeys(BOUNDARY_KEYS, 0.0)
        self._prev = None  # (t, diss, wall values dict, psit, psixt)

    def _wall_values(self, fields: PerturbationFields, state: FieldState) -> dict:
        prof = self.shift.profile
        params = prof.params
        zeta0 = -params.s * state.t + (self.shift.alpha - self.shift.beta)
        V0, _, _, _ = evaluate_profile(prof, zeta0)
        return {
            "phi": fields.phi[0],
            "psi": fields.psi[0],
            "phi_x": fields.phi_x[0],
            "psi_x": fields.psi_x[0],
            "phi_xx": fields.phi_xx[0],
            "psi_xx": fields.psi_xx[0],
            "v_wall": state.v[0],
            "dpV": params.pressure.dp(V0),
        }

    @staticmethod
    def _products(w: dict, psit: float, psixt: float) -> dict:
        v5 = w["v_wall"] ** 5
        return {
            "ib_phi_psi": w["phi"] * w["psi"],
            "ib_psi_psix": w["psi"] * w["psi_x"],
            "ib_psix_phix": w["psi_x"] * w["phi_x"],
            "ib_psit_psix": psit * w["psi_x"],
            "ib_psix_psixx": w["psi_x"] * w["psi_xx"],
            "ib_psixt_psixx": psixt * w["psi_xx"],
            "ib_phixx_psi": w["phi_xx"] * w["psi"] / (w["dpV"] * v5),
            "ib_phix_phixx": w["phi_x"] * w["phi_xx"] / v5,
            "ib_phixx_psixx": w["phi_xx"] * w["psi_xx"] / v5,
            "ib_psit_phixx": psit * w["phi_xx"],
        }

    def __call__(self, i: int, state: FieldState) -> None:
        fields = compute_perturbation(state, self.grid, self.shift)
        norms = sobolev_norms(fields, self.grid.dx)
        sup_v, sup_u = sup_distance(state, self.grid, self.shift)
        mass = mass_balance_residual(state, self.initial, self.grid, self.shift)
        w = self._wall_values(fields, state)

        s = self.shift.profile.params.s
        bres_phi0 = w["phi"] - eval_A(self.shift, state.t, order=0)
        bres_psix0 = w["psi_x"] - eval_A(self.shift, state.t, order=1)
        bres_phixx0 = w["phi_xx"] - eval_A(self.shift, state.t, order=2) / (s * s)

        if self._denom is None:
            self._denom = (
                norms["phi_h3"] ** 2
                + norms["psi_h2"] ** 2
                + np.exp(-self.shift.c1_hat * self.shift.beta)
            )
            psit = psixt = 0.0
        else:
            t_prev, diss_prev, w_prev, psit_prev, psixt_prev = self._prev
            dt = state.t - t_prev
            if dt <= 0.0:
                raise AuditError("records not strictly increasing in time")
            psit = (w["psi"] - w_prev["psi"]) / dt
            psixt = (w["psi_x"] - w_prev["psi_x"]) / dt
            if psit_prev is None:  # first interval reuses its own slope
                psit_prev, psixt_prev = psit, psixt
            cur = self._products(w, psit, psixt)
            prev = self._products(w_prev, psit_prev, psixt_prev)
            for k in BOUNDARY_KEYS:
                self._ib[k] += 0.5 * (cur[k] + prev[k]) * dt
            self._diss_int += 0.5 * (norms["diss"] + diss_prev) * dt

        ratio = (norms["phi_h3"] ** 2 + norms["psi_h2"] ** 2 + self._diss_int) / (
            self._denom
        )
        self.records.append(
            DiagnosticsRecord(
                t=state.t,
                phi_h3=norms["phi_h3"],
                psi_h2=norms["psi_h2"],
                N=norms["N"],
                sup_v=sup_v,
                sup_u=sup_u,
                mass_res=mass,
                bres_phi0=bres_phi0,
                bres_psix0=bres_psix0,
                bres_phixx0=bres_phixx0,
                C0_ratio=ratio,
                diss_running=self._diss_int,
                boundary=dict(self._ib),
                tail_ok=fields.tail_ok,
            )
        )
        self._prev = (
            state.t,
            norms["diss"],
            w,
            None if len(self.records) == 1 else psit,
            None if len(self.records) == 1 else psixt,
        )


def theorem_bound_audit(records: list[DiagnosticsRecord]) -> dict:
    """Worst-case constants extracted from a finished record series."""
    if not records:
        raise AuditError("no records to audit")
    return {
        "C0": max(r.C0_ratio for r in records),
        "max_mass_res": max(abs(r.mass_res) for r in records),
        "max_bres_phi0": max(abs(r.bres_phi0) for r in records),
        "max_bres_psix0": max(abs(r.bres_psix0) for r in records),
        "max_bres_phixx0": max(abs(r.bres_phixx0) for r in records),
        "final_N": records[-1].N,
    }
