"""Command line front end.

Subcommands map onto the pipeline stages: ``rh`` (far-field states and
margins), ``profile`` (front construction), ``shift`` (wall-induced
asymptotic shift and wall data), ``simulate`` (full run with diagnostics),
``audit`` (re-check invariants on a stored series) and ``convergence``
(self-convergence study).  Exit codes: 0 success, 2 configuration error,
3 front existence failure, 4 solver failure, 5 audit violation.
"""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from .config import load_config
from .errors import (
    AuditError,
    ConfigError,
    CorridorError,
    DegenerateShockError,
    InconsistentParamsError,
    NotATwoShockError,
    PositivityError,
    ProfileError,
    ShiftConsistencyError,
    StepFailure,
    TailTruncationError,
    VacuumExceededError,
)
from .experiment import prepare, refinement_study, simulate
from .model import (
    PressureLaw,
    lax_entropy_margin,
    profile_existence_margin,
    solve_rankine_hugoniot,
)
from .profile import solve_profile
from .shift import boundary_data_norm, eval_A

__all__ = ["main"]

_FMT = "%.17g"


def _kv(key: str, value: float) -> None:
    print(f"{key} = " + _FMT % value)


def _params_from_config(cfg):
    pressure = PressureLaw(p0=cfg.p0, gamma=cfg.gamma)
    return solve_rankine_hugoniot(pressure, cfg.v_plus, cfg.u_plus, cfg.mu, cfg.kappa)


def _cmd_rh(args) -> int:
    cfg = load_config(args.config, tuple(args.set))
    params = _params_from_config(cfg)
    lax_plus, lax_minus = lax_entropy_margin(params)
    _kv("v_plus", params.v_plus)
    _kv("u_plus", params.u_plus)
    _kv("v_minus", params.v_minus)
    _kv("s", params.s)
    _kv("delta", params.delta)
    _kv("lax_margin_plus", lax_plus)
    _kv("lax_margin_minus", lax_minus)
    _kv("existence_margin", profile_existence_margin(params))
    return 0


def _cmd_profile(args) -> int:
    cfg = load_config(args.config, tuple(args.set))
    params = _params_from_config(cfg)
    eps_init = cfg.eps_init if cfg.eps_init is not None else 1e-6 * params.delta
    prof = solve_profile(
        params,
        xi_half_width=cfg.xi_half_width,
        ode_tol=cfg.ode_tol,
        eps_init=eps_init,
        samples=cfg.samples,
    )
    out = Path(args.out if args.out is not None else cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["xi,V,U,Vp,Vpp"]
    for k in range(prof.xi.size):
        lines.append(
            ",".join(
                _FMT % v
                for v in (prof.xi[k], prof.V[k], prof.U[k], prof.Vp[k], prof.Vpp[k])
            )
        )
    (out / "profile.csv").write_text("\n".join(lines) + "\n")
    _kv("a1", prof.a1)
    _kv("a2", prof.a2)
    _kv("c1_left", prof.c1_left)
    _kv("c1_right", prof.c1_right)
    _kv("c1_hat", prof.c1_hat)
    _kv("xi_half_width", prof.xi_half_width)
    print(f"profile table written to {out / 'profile.csv'}")
    return 0


def _cmd_shift(args) -> int:
    cfg = load_config(args.config, tuple(args.set))
    setup = prepare(cfg)
    _kv("beta", setup.shift.beta)
    _kv("alpha", setup.shift.alpha)
    _kv("I_residual", setup.shift.I_residual)
    _kv("c1_hat", setup.shift.c1_hat)
    parts = boundary_data_norm(setup.shift)
    for k in ("A0", "A1", "A2", "A3", "w31_sum"):
        _kv(f"wall_{k}", parts[k])
    print("t,A,A1,A2,A3")
    for t in np.linspace(0.0, cfg.t_final, 51):
        vals = [eval_A(setup.shift, t, order=k) for k in range(4)]
        print(",".join(_FMT % v for v in [t] + vals))
    return 0


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config, tuple(args.set))
    setup = prepare(cfg)
    out = args.out if args.out is not None else setup.config.out_dir
    records, final = simulate(setup, out)
    last = records[-1]
    _kv("t_final", final.t)
    _kv("alpha", setup.shift.alpha)
    _kv("final_N", last.N)
    _kv("final_sup_v", last.sup_v)
    _kv("final_sup_u", last.sup_u)
    _kv("C0", max(r.C0_ratio for r in records))
    print(f"series written to {Path(out) / 'series.csv'}")
    return 0


def _read_series(path: str) -> list[dict]:
    try:
        with open(path, newline="") as fh:
            return [
                {k: float(v) for k, v in row.items()}
                for row in csv.DictReader(fh)
            ]
    except OSError as exc:
        raise ConfigError(f"cannot read series {path}: {exc}") from None
    except (TypeError, ValueError):
        raise AuditError(f"series file {path} is not a numeric CSV") from None


def _cmd_audit(args) -> int:
    cfg = load_config(args.config, tuple(args.set))
    if cfg.L is None or cfg.beta is None:
        raise ConfigError(
            "audit needs a resolved configuration (use the effective.ini "
            "written next to the series)"
        )
    params = _params_from_config(cfg)
    rows = _read_series(args.series)
    if not rows:
        raise AuditError("series holds no records")
    mass_tol = args.mass_tol if args.mass_tol is not None else 1e-6 * params.delta * cfg.L
    bres_tol = args.bres_tol if args.bres_tol is not None else 1e-3 * params.delta
    t_prev = -1.0
    for i, row in enumerate(rows):
        if row["t"] <= t_prev and i > 0:
            raise AuditError(f"record {i}: time not increasing")
        t_prev = row["t"]
        if not row["C0_ratio"] <= args.c0_limit:
            raise AuditError(
                f"record {i} (t={row['t']:g}): C0_ratio {row['C0_ratio']:.6g} "
                f"exceeds limit {args.c0_limit:g}"
            )
        if not abs(row["mass_res"]) <= mass_tol:
            raise AuditError(
                f"record {i} (t={row['t']:g}): |mass_res| {abs(row['mass_res']):.3e} "
                f"exceeds {mass_tol:.3e}"
            )
        for key in ("bres_phi0", "bres_psix0", "bres_phixx0"):
            if not abs(row[key]) <= bres_tol:
                raise AuditError(
                    f"record {i} (t={row['t']:g}): |{key}| {abs(row[key]):.3e} "
                    f"exceeds {bres_tol:.3e}"
                )
    print(f"audit ok: {len(rows)} records")
    _kv("C0", max(r["C0_ratio"] for r in rows))
    return 0


def _cmd_convergence(args) -> int:
    cfg = load_config(args.config, tuple(args.set))
    result = refinement_study(cfg, levels=args.levels, factor=args.factor)
    for lev in result["levels"]:
        print(
            f"N = {lev['N']:d}  dx = " + _FMT % lev["dx"]
            + "  sup_v = " + _FMT % lev["sup_v"]
            + "  sup_u = " + _FMT % lev["sup_u"]
        )
    for k, r in enumerate(result["ratios"]):
        _kv(f"ratio_{k}", r)
    for k, order in enumerate(result["orders"]):
        _kv(f"order_{k}", order)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nskshock",
        description="Viscous-capillary shock fronts on the half line: "
        "construction, wall-induced shift, implicit simulation, diagnostics.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="INI configuration file")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="override a config entry (repeatable)",
        )

    p = sub.add_parser("rh", help="far-field states, speed and margins")
    common(p)
    p = sub.add_parser("profile", help="construct the front and write its table")
    common(p)
    p.add_argument("--out", help="output directory (default: config output.dir)")
    p = sub.add_parser("shift", help="wall-induced shift and wall data norms")
    common(p)
    p = sub.add_parser("simulate", help="run the half-line problem with diagnostics")
    common(p)
    p.add_argument("--out", help="output directory (default: config output.dir)")
    p = sub.add_parser("audit", help="re-check invariants on a stored series")
    common(p)
    p.add_argument("--series", required=True, help="series.csv to audit")
    p.add_argument("--c0-limit", type=float, default=100.0)
    p.add_argument("--mass-tol", type=float, default=None)
    p.add_argument("--bres-tol", type=float, default=None)
    p = sub.add_parser("convergence", help="self-convergence under refinement")
    common(p)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--factor", type=int, default=2)
    return parser


_DISPATCH = {
    "rh": _cmd_rh,
    "profile": _cmd_profile,
    "shift": _cmd_shift,
    "simulate": _cmd_simulate,
    "audit": _cmd_audit,
    "convergence": _cmd_convergence,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except (ConfigError, TailTruncationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (
        NotATwoShockError,
        VacuumExceededError,
        InconsistentParamsError,
        DegenerateShockError,
        ProfileError,
    ) as exc:
        print(f"front construction failed: {exc}", file=sys.stderr)
        return 3
    except (StepFailure, PositivityError, CorridorError, ShiftConsistencyError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 4
    except AuditError as exc:
        print(f"audit violation: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    sys.exit(main())
