"""INI run configuration: strict parsing, overrides, effective echo.

A run is described by a small INI file.  Unknown sections or keys are
rejected rather than ignored, several keys may be left as ``auto`` to be
resolved from the computed front (tail rate, drift speed), and the fully
resolved configuration is echoed next to the run outputs so that a stored
series can be audited or reproduced without guessing defaults.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError

__all__ = ["RunConfig", "parse_config", "load_config", "apply_overrides", "emit_config"]


@dataclass
class RunConfig:
    # model
    p0: float = 1.0
    gamma: float = 1.0
    v_plus: Optional[float] = None
    u_plus: Optional[float] = None
    mu: Optional[float] = None
    kappa: Optional[float] = None
    # profile
    xi_half_width: Optional[float] = None
    ode_tol: float = 1e-10
    eps_init: Optional[float] = None
    samples: int = 4097
    # shift
    beta: Optional[float] = None
    # grid
    L: Optional[float] = None
    N: int = 1600
    # time
    dt: Optional[float] = None
    t_final: float = 50.0
    theta: float = 0.5
    # newton
    newton_tol: float = 1e-10
    newton_max_iter: int = 25
    fd_jacobian: bool = False
    # perturbation
    kind: str = "none"
    amplitude: float = 0.0
    center: Optional[float] = None
    width: float = 1.0
    u_factor: float = 0.0
    # output
    out_dir: str = "out"
    series_every: int = 1
    snapshot_every: int = 0


# (section, key) -> (attribute, type, nullable)
_SCHEMA = {
    ("model", "p0"): ("p0", float, False),
    ("model", "gamma"): ("gamma", float, False),
    ("model", "v_plus"): ("v_plus", float, True),
    ("model", "u_plus"): ("u_plus", float, True),
    ("model", "mu"): ("mu", float, True),
    ("model", "kappa"): ("kappa", float, True),
    ("profile", "xi_half_width"): ("xi_half_width", float, True),
    ("profile", "ode_tol"): ("ode_tol", float, False),
    ("profile", "eps_init"): ("eps_init", float, True),
    ("profile", "samples"): ("samples", int, False),
    ("shift", "beta"): ("beta", float, True),
    ("grid", "L"): ("L", float, True),
    ("grid", "N"): ("N", int, False),
    ("time", "dt"): ("dt", float, True),
    ("time", "t_final"): ("t_final", float, False),
    ("time", "theta"): ("theta", float, False),
    ("newton", "tol"): ("newton_tol", float, False),
    ("newton", "max_iter"): ("newton_max_iter", int, False),
    ("newton", "fd_jacobian"): ("fd_jacobian", bool, False),
    ("perturbation", "kind"): ("kind", str, False),
    ("perturbation", "amplitude"): ("amplitude", float, False),
    ("perturbation", "center"): ("center", float, True),
    ("perturbation", "width"): ("width", float, False),
    ("perturbation", "u_factor"): ("u_factor", float, False),
    ("output", "dir"): ("out_dir", str, False),
    ("output", "series_every"): ("series_every", int, False),
    ("output", "snapshot_every"): ("snapshot_every", int, False),
}

_REQUIRED = (("model", "v_plus"), ("model", "u_plus"), ("model", "mu"), ("model", "kappa"))

_BOOL_WORDS = {"true": True, "yes": True, "1": True, "on": True,
               "false": False, "no": False, "0": False, "off": False}


def _convert(raw: str, typ, nullable: bool, where: str):
    text = raw.strip()
    if nullable and text.lower() in ("", "none", "auto"):
        return None
    try:
        if typ is bool:
            return _BOOL_WORDS[text.lower()]
        if typ is int:
            return int(text)
        if typ is float:
            return float(text)
        return text
    except (ValueError, KeyError):
        raise ConfigError(f"cannot parse {where} = {raw!r} as {typ.__name__}") from None


def parse_config(text: str, overrides: tuple[str, ...] = ()) -> RunConfig:
    """Parse INI text, apply ``section.key=value`` overrides, validate."""
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str  # keys are case-sensitive (N, L)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    apply_overrides(cp, overrides)

    cfg = RunConfig()
    seen = set()
    for section in cp.sections():
        for key in cp[section]:
            spec = _SCHEMA.get((section, key))
            if spec is None:
                raise ConfigError(f"unknown config key [{section}] {key}")
            attr, typ, nullable = spec
            setattr(cfg, attr, _convert(cp[section][key], typ, nullable, f"[{section}] {key}"))
            seen.add((section, key))
    for section, key in _REQUIRED:
        if (section, key) not in seen or getattr(cfg, _SCHEMA[(section, key)][0]) is None:
            raise ConfigError(f"missing required config key [{section}] {key}")
    _validate_ranges(cfg)
    return cfg


def load_config(path: str, overrides: tuple[str, ...] = ()) -> RunConfig:
    try:
        with open(path, "r") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, overrides)


def apply_overrides(cp: configparser.ConfigParser, overrides) -> None:
    """Apply ``section.key=value`` strings on top of parsed INI data."""
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        target, value = item.split("=", 1)
        section, key = target.split(".", 1)
        section, key = section.strip(), key.strip()
        if (section, key) not in _SCHEMA:
            raise ConfigError(f"unknown config key [{section}] {key}")
        if not cp.has_section(section):
            cp.add_section(section)
        cp[section][key] = value.strip()


def _validate_ranges(cfg: RunConfig) -> None:
    checks = [
        (cfg.p0 > 0.0, "model.p0 must be positive"),
        (cfg.gamma >= 1.0, "model.gamma must be >= 1"),
        (cfg.v_plus > 0.0, "model.v_plus must be positive"),
        (cfg.u_plus < 0.0, "model.u_plus must be negative (incoming 2-shock)"),
        (cfg.mu > 0.0, "model.mu must be positive"),
        (cfg.kappa > 0.0, "model.kappa must be positive"),
        (cfg.ode_tol > 0.0, "profile.ode_tol must be positive"),
        (cfg.samples >= 513, "profile.samples must be >= 513"),
        (cfg.beta is None or cfg.beta > 0.0, "shift.beta must be positive"),
        (cfg.L is None or cfg.L > 0.0, "grid.L must be positive"),
        (cfg.N >= 64, "grid.N must be >= 64"),
        (cfg.dt is None or cfg.dt > 0.0, "time.dt must be positive"),
        (cfg.t_final >= 0.0, "time.t_final must be >= 0"),
        (0.5 <= cfg.theta <= 1.0, "time.theta must lie in [0.5, 1]"),
        (cfg.newton_tol > 0.0, "newton.tol must be positive"),
        (cfg.newton_max_iter >= 1, "newton.max_iter must be >= 1"),
        (cfg.kind in ("none", "bump"), "perturbation.kind must be none or bump"),
        (cfg.width > 0.0, "perturbation.width must be positive"),
        (cfg.series_every >= 1, "output.series_every must be >= 1"),
        (cfg.snapshot_every >= 0, "output.snapshot_every must be >= 0"),
    ]
    for ok, msg in checks:
        if not ok:
            raise ConfigError(msg)


def _fmt_value(value) -> str:
    if value is None:
        return "none"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        # cast strips numpy scalar wrappers so repr stays plain
        return repr(float(value))
    return str(value)


def emit_config(cfg: RunConfig) -> str:
    """Serialize back to INI (floats round-trip exactly through repr)."""
    lines = []
    current = None
    for (section, key), (attr, _, _) in _SCHEMA.items():
        if section != current:
            if current is not None:
                lines.append("")
            lines.append(f"[{section}]")
            current = section
        lines.append(f"{key} = {_fmt_value(getattr(cfg, attr))}")
    lines.append("")
    return "\n".join(lines)
