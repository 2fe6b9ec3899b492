"""Acceptance gate: one test per advertised guarantee.

Each test computes its quantities from the session fixtures, records a
one-line verdict through ``criterion_report`` (printed in the terminal
summary), and then asserts.  Tolerances are part of the contract and are
written out literally.
"""

import numpy as np
import pytest

from nskshock.model import lax_entropy_margin, profile_existence_margin
from nskshock.shift import boundary_data_norm, eval_A, eval_I
from nskshock.solver import FieldState, Grid, SolverConfig, run


def _nearest(records, t):
    return min(records, key=lambda r: abs(r.t - t))


def test_criterion_01_rh_entropy_algebra(r1_params, r2_params, criterion_report):
    ok = True
    for pr in (r1_params, r2_params):
        jump_u = abs(pr.u_plus + pr.s * pr.delta)
        dp = float(pr.pressure(pr.v_minus) - pr.pressure(pr.v_plus))
        jump_p = abs(pr.s**2 * pr.delta - dp)
        ok &= jump_u <= 1e-12 * abs(pr.u_plus)
        ok &= jump_p <= 1e-12 * dp
        lax_p, lax_m = lax_entropy_margin(pr)
        ok &= lax_p > 0.0 and lax_m > 0.0
    margin = profile_existence_margin(r2_params)
    ok &= abs(margin - 388.0) <= 1e-9
    criterion_report(1, ok, f"jump identities to 1e-12, R2 margin {margin:.12g}")
    assert ok


def test_criterion_02_profile_correctness(r2_profile, criterion_report):
    prof = r2_profile
    pr = prof.params
    mono = bool(np.all(np.diff(prof.V) > 0.0) and np.all(np.diff(prof.U) < 0.0))
    h = prof.xi[1] - prof.xi[0]
    V = prof.V
    Vpp = (V[2:] - 2.0 * V[1:-1] + V[:-2]) / h**2
    Vp = (V[2:] - V[:-2]) / (2.0 * h)
    Vm = V[1:-1]
    resid = (
        pr.kappa * Vpp / Vm**5
        - 2.5 * pr.kappa * Vp**2 / Vm**6
        + pr.mu * pr.s * Vp / Vm
        - (pr.s * (prof.a1 - pr.s * Vm) - 1.0 / Vm - prof.a2)
    )
    n = resid.size
    worst = float(np.abs(resid[int(0.05 * n) : int(0.95 * n)]).max())
    rate_err = abs(prof.c1_left / 0.0707 - 1.0)
    ok = mono and worst < 1e-5 and rate_err <= 0.05
    criterion_report(
        2, ok, f"monotone, interior residual {worst:.3e}, left rate off by {rate_err:.2%}"
    )
    assert ok


def test_criterion_03_decay_envelope(r1_profile, r2_profile, criterion_report):
    C = 0.0
    for prof in (r1_profile, r2_profile):
        pr = prof.params
        c1 = prof.c1_hat
        env = pr.delta * np.exp(-c1 * np.abs(prof.xi))
        left = prof.xi <= 0.0
        C = max(C, float((np.abs(prof.V[left] - pr.v_minus) / env[left]).max()))
        C = max(C, float((np.abs(prof.V[~left] - pr.v_plus) / env[~left]).max()))
    ok = C <= 10.0
    criterion_report(3, ok, f"fitted envelope constant {C:.3f} (limit 10)")
    assert ok


def test_criterion_04_shift_identity(run8, criterion_report):
    setup = run8.setup
    delta = setup.params.delta
    shift = setup.shift
    x, v0 = setup.grid.x, setup.initial.v
    I0 = eval_I(shift.alpha, x, v0, shift.profile, shift.beta)
    h = 1e-3
    fd = (
        eval_I(shift.alpha + h, x, v0, shift.profile, shift.beta)
        - eval_I(shift.alpha - h, x, v0, shift.profile, shift.beta)
    ) / (2.0 * h)
    slope = setup.params.v_minus - setup.params.v_plus
    slope_err = abs(fd / slope - 1.0)
    ok = abs(I0) <= 1e-6 * delta and slope_err <= 1e-4
    criterion_report(
        4, ok, f"|I(alpha)| = {abs(I0):.3e} (tol {1e-6 * delta:.1e}), "
        f"dI rel err {slope_err:.2e}"
    )
    assert ok


def test_criterion_05_boundary_data(run8, criterion_report):
    shift = run8.setup.shift
    s = run8.setup.params.s
    c1, beta = shift.c1_hat, shift.beta
    t = np.linspace(0.0, 50.0, 501)
    envs = [
        float(np.max(np.abs(eval_A(shift, t, order=k)) * np.exp(c1 * (beta + s * t))))
        for k in range(4)
    ]
    finite = all(np.isfinite(e) for e in envs)
    C_emp = boundary_data_norm(shift)["w31_sum"] * np.exp(c1 * beta)
    ok = finite and C_emp <= 10.0
    criterion_report(
        5, ok, f"per-order envelopes {', '.join(f'{e:.3g}' for e in envs)}; "
        f"summed wall norm needs C = {C_emp:.2f} (limit 10)"
    )
    assert ok, (
        f"wall data sum exceeds 10 exp(-c1 beta): empirical constant {C_emp:.2f}"
    )


def test_criterion_06_constant_state(r1_params, criterion_report):
    grid = Grid(L=50.0, N=512)
    v_star = 1.05
    v0 = np.full(grid.N + 1, v_star)
    u0 = np.zeros(grid.N + 1)
    state = FieldState(t=0.0, v=v0.copy(), u=u0.copy())
    final = run(grid, r1_params, SolverConfig(dt=0.05, t_final=50.0), state)
    err = max(float(np.abs(final.v - v_star).max()), float(np.abs(final.u).max()))
    ok = err <= 1e-10
    criterion_report(6, ok, f"1000-step constant-state error {err:.3e} (tol 1e-10)")
    assert ok


def test_criterion_07_refinement(refinement, criterion_report):
    ratios = refinement["ratios"]
    ok = all(3.3 <= r <= 4.7 for r in ratios)
    criterion_report(
        7, ok, "halving ratios " + ", ".join(f"{r:.3f}" for r in ratios)
        + " (window [3.3, 4.7])"
    )
    assert ok


def test_criterion_08_stability(run8, criterion_report):
    recs = run8.records
    last = recs[-1]
    post = [r for r in recs if r.t >= 2.0]  # past the initial adjustment
    rv = last.sup_v / max(r.sup_v for r in post)
    ru = last.sup_u / max(r.sup_u for r in post)
    N50, N25, N5 = last.N, _nearest(recs, 25.0).N, _nearest(recs, 5.0).N
    ok = rv <= 0.2 and ru <= 0.2 and N50 < N25 < N5
    criterion_report(
        8, ok, f"sup decay ratios v {rv:.3f}, u {ru:.3f} (limit 0.2); "
        f"N(50)={N50:.4f} < N(25)={N25:.4f} < N(5)={N5:.4f}"
    )
    assert ok


def test_criterion_09_mass_balance(run8, criterion_report):
    setup = run8.setup
    tol = 1e-4 * setup.params.delta * setup.config.L
    worst = max(abs(r.mass_res) for r in run8.records)
    worst_late = 0.0
    for r in run8.records:
        if r.t >= 25.0:
            A = eval_A(setup.shift, r.t)
            lhs = -(r.bres_phi0 + A)
            worst_late = max(worst_late, abs(abs(lhs) - abs(A)))
    ok = worst <= tol and worst_late <= tol
    criterion_report(
        9, ok, f"max |mass residual| {worst:.3e}, late-time wall tracking "
        f"{worst_late:.3e} (tol {tol:.3e})"
    )
    assert ok


def test_criterion_10_boundary_integrals(run8, criterion_report):
    setup = run8.setup
    dx, dt = setup.grid.dx, setup.solver.dt
    disc = 10.0 * (dx**2 + dt**2)
    tol_ib = 10.0 * np.exp(-setup.shift.c1_hat * setup.shift.beta) + disc
    worst_ib = max(
        abs(val) for r in run8.records for val in r.boundary.values()
    )
    worst_id = max(
        max(abs(r.bres_phi0), abs(r.bres_psix0), abs(r.bres_phixx0))
        for r in run8.records
    )
    ok = worst_ib <= tol_ib and worst_id <= disc
    criterion_report(
        10, ok, f"max boundary integral {worst_ib:.3e} (tol {tol_ib:.3e}), "
        f"max wall identity defect {worst_id:.3e} (tol {disc:.3e})"
    )
    assert ok


def test_criterion_11_theorem_bound(run8, run8_halved, criterion_report):
    C0 = max(r.C0_ratio for r in run8.records)
    C0h = max(r.C0_ratio for r in run8_halved.records)
    change = abs(C0h - C0) / C0
    ok = np.isfinite(C0) and np.isfinite(C0h) and change < 0.2
    criterion_report(
        11, ok, f"C0 {C0:.6f} -> {C0h:.6f} under halving ({change:.2%} change)"
    )
    assert ok


def test_criterion_12_truncation(run8, run8_double_length, criterion_report):
    a, b = run8.records, run8_double_length.records
    same_len = len(a) == len(b)
    worst = 0.0
    if same_len:
        for ra, rb in zip(a, b):
            for f in ("phi_h3", "psi_h2", "N", "sup_v", "sup_u"):
                worst = max(worst, abs(getattr(ra, f) - getattr(rb, f)))
    ok = same_len and worst < 1e-6
    criterion_report(
        12, ok, f"doubling L changes reported norms by at most {worst:.3e} "
        "(tol 1e-6)"
    )
    assert ok
