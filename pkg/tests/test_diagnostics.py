"""Perturbation reconstruction, energy norms, and the audit trail."""

import numpy as np
import pytest
from scipy.special import erfc

from nskshock.diagnostics import (
    BOUNDARY_KEYS,
    DiagnosticsAuditor,
    PerturbationFields,
    compute_perturbation,
    mass_balance_residual,
    sobolev_norms,
    sup_distance,
    theorem_bound_audit,
)
from nskshock.errors import AuditError
from nskshock.profile import evaluate_profile
from nskshock.shift import ShiftData
from nskshock.solver import FieldState, Grid


@pytest.fixture(scope="module")
def gaussian_state(r1_profile):
    """Profile plus a known Gaussian volume bump, zero-shift reference.

    With alpha = 0 and t = 0 the reference in compute_perturbation is the
    same translated profile the state was built from, so the deviation is
    the bump alone and phi has an erfc closed form.
    """
    beta = np.log(1e6) / r1_profile.c1_hat
    grid = Grid(L=300.0, N=60000)
    x = grid.x
    V, U, _, _ = evaluate_profile(r1_profile, x - beta)
    a, w = 1e-3, 2.0
    bump = a * np.exp(-(((x - beta) / w) ** 2))
    state = FieldState(t=0.0, v=V + bump, u=U.copy())
    shift = ShiftData(profile=r1_profile, beta=beta, alpha=0.0, I_residual=0.0)
    return grid, state, shift, (a, w, beta)


def test_antiderivative_against_erfc(gaussian_state):
    grid, state, shift, (a, w, x0) = gaussian_state
    fields = compute_perturbation(state, grid, shift)
    assert fields.tail_ok
    idx = np.searchsorted(grid.x, [x0 - 6.0, x0 - 2.0, x0, x0 + 2.0, x0 + 6.0])
    exact = -a * w * (np.sqrt(np.pi) / 2.0) * erfc((grid.x[idx] - x0) / w)
    assert np.max(np.abs(fields.phi[idx] - exact)) <= 1e-8
    # no velocity deviation anywhere in this state
    for arr in (fields.psi, fields.psi_x, fields.psi_xx, fields.psi_xxx):
        assert np.all(arr == 0.0)


def test_gradient_chain_against_bump_derivatives(gaussian_state):
    grid, state, shift, (a, w, x0) = gaussian_state
    fields = compute_perturbation(state, grid, shift)
    z = (grid.x - x0) / w
    b = a * np.exp(-(z**2))
    # (V + b) - V inside the reconstruction rounds at the size of V
    assert np.max(np.abs(fields.phi_x - b)) <= 1e-15
    assert np.max(np.abs(fields.phi_xx - (-2.0 * z / w) * b)) <= 1e-7
    assert np.max(np.abs(fields.phi_xxx - (4.0 * z**2 - 2.0) / w**2 * b)) <= 1e-6
    assert (
        np.max(np.abs(fields.phi_xxxx - (12.0 * z - 8.0 * z**3) / w**3 * b)) <= 1e-5
    )


def test_sup_distance_sees_the_bump(gaussian_state):
    grid, state, shift, (a, _, _) = gaussian_state
    sup_v, sup_u = sup_distance(state, grid, shift)
    assert sup_v == pytest.approx(a, rel=1e-6)
    assert sup_u == 0.0


def test_unshifted_fields_on_request(gaussian_state):
    grid, state, shift, _ = gaussian_state
    plain = compute_perturbation(state, grid, shift)
    assert plain.Phi0 is None and plain.Psi0 is None
    both = compute_perturbation(state, grid, shift, include_unshifted=True)
    # alpha = 0 here, so the unshifted antiderivatives coincide exactly
    assert np.array_equal(both.Phi0, both.phi)
    assert np.array_equal(both.Psi0, both.psi)


def test_tail_flag_trips_on_edge_mass(gaussian_state):
    grid, state, shift, _ = gaussian_state
    v_bad = state.v + 1e-3 * np.exp(-(((grid.x - grid.L) / 2.0) ** 2))
    bad = FieldState(t=0.0, v=v_bad, u=state.u)
    assert not compute_perturbation(bad, grid, shift).tail_ok


@pytest.mark.parametrize("omega", [1.0, 0.5])
def test_sobolev_norms_on_sine(omega):
    # whole number of periods, so every trapezoid is exact to rounding
    L = 20.0 * np.pi
    n = 4000
    x = np.linspace(0.0, L, n + 1)
    dx = L / n
    s, c = np.sin(omega * x), np.cos(omega * x)
    zero = np.zeros_like(x)
    fields = PerturbationFields(
        t=0.0,
        phi=s,
        phi_x=omega * c,
        phi_xx=-(omega**2) * s,
        phi_xxx=-(omega**3) * c,
        phi_xxxx=omega**4 * s,
        psi=zero,
        psi_x=zero,
        psi_xx=zero,
        psi_xxx=zero,
        tail_ok=True,
    )
    norms = sobolev_norms(fields, dx)
    w2 = omega * omega
    assert norms["phi_h3"] ** 2 == pytest.approx(
        0.5 * L * (1.0 + w2 + w2**2 + w2**3), rel=1e-12
    )
    assert norms["diss"] == pytest.approx(
        0.5 * L * (w2 + w2**2 + w2**3 + w2**4), rel=1e-12
    )
    assert norms["psi_h2"] == 0.0
    assert norms["N"] == norms["phi_h3"]


def test_exact_front_gives_zero_everything(r1_profile):
    beta = np.log(1e6) / r1_profile.c1_hat
    grid = Grid(L=300.0, N=3000)
    V, U, _, _ = evaluate_profile(r1_profile, grid.x - beta)
    state = FieldState(t=0.0, v=V, u=U)
    shift = ShiftData(profile=r1_profile, beta=beta, alpha=0.0, I_residual=0.0)
    fields = compute_perturbation(state, grid, shift)
    norms = sobolev_norms(fields, grid.dx)
    assert norms["N"] == 0.0 and norms["diss"] == 0.0
    assert sup_distance(state, grid, shift) == (0.0, 0.0)
    assert mass_balance_residual(state, state, grid, shift) == 0.0


def test_auditor_rejects_stalled_time(r1_profile):
    beta = np.log(1e6) / r1_profile.c1_hat
    grid = Grid(L=300.0, N=600)
    V, U, _, _ = evaluate_profile(r1_profile, grid.x - beta)
    state = FieldState(t=0.0, v=V, u=U)
    shift = ShiftData(profile=r1_profile, beta=beta, alpha=0.0, I_residual=0.0)
    auditor = DiagnosticsAuditor(grid, state, shift)
    auditor(0, state)
    with pytest.raises(AuditError):
        auditor(1, state)


def test_record_series_shape(run8):
    recs = run8.records
    assert recs[0].t == 0.0
    assert recs[-1].t == 50.0
    ts = [r.t for r in recs]
    assert all(b > a for a, b in zip(ts, ts[1:]))
    for r in recs:
        assert set(r.boundary) == set(BOUNDARY_KEYS)
        assert all(np.isfinite(val) for val in r.boundary.values())
        assert r.tail_ok
        assert r.N**2 == pytest.approx(r.phi_h3**2 + r.psi_h2**2, rel=1e-12)


def test_mass_and_wall_balances_share_the_shift(run8):
    """mass_res and bres_phi0 are two views of the same integral identity;
    their sum telescopes back to the (tiny) shift residual."""
    I_res = run8.setup.shift.I_residual
    for r in run8.records:
        assert abs(r.mass_res + r.bres_phi0 + I_res) <= 1e-12
        assert r.bres_psix0 == 0.0  # both sides share one evaluation path


def test_theorem_bound_audit(run8):
    audit = theorem_bound_audit(run8.records)
    assert set(audit) == {
        "C0",
        "max_mass_res",
        "max_bres_phi0",
        "max_bres_psix0",
        "max_bres_phixx0",
        "final_N",
    }
    assert audit["C0"] == max(r.C0_ratio for r in run8.records)
    assert audit["final_N"] == run8.records[-1].N
    assert audit["max_mass_res"] >= 0.0
    with pytest.raises(AuditError):
        theorem_bound_audit([])
