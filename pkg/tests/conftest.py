"""Shared fixtures: two reference shocks and the standard perturbed run.

Everything expensive is session-scoped.  The two parameter sets exercise
different regimes: a weak shock (amplitude 0.1, slow tails) for the
stability and shift experiments, and a strong one (amplitude 1) that
stresses the profile construction.
"""

import numpy as np
import pytest

from nskshock.config import RunConfig
from nskshock.experiment import prepare, refinement_study, simulate
from nskshock.model import PressureLaw, solve_rankine_hugoniot
from nskshock.profile import solve_profile

_acceptance_lines = []


@pytest.fixture(scope="session")
def criterion_report():
    """Collector for the one-line acceptance verdicts."""

    def record(num: int, ok: bool, detail: str) -> None:
        verdict = "PASS" if ok else "FAIL"
        _acceptance_lines.append(f"criterion {num:02d}: {verdict}  {detail}")

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def r1_params():
    # weak shock: v- lands on 1 exactly, s = 10/sqrt(110)
    return solve_rankine_hugoniot(PressureLaw(1.0, 1.0), 1.1, -1.0 / np.sqrt(110.0), 1.0, 0.1)


@pytest.fixture(scope="session")
def r2_params():
    # strong shock: v- = 1, s = sqrt(1/2)
    return solve_rankine_hugoniot(PressureLaw(1.0, 1.0), 2.0, -np.sqrt(0.5), 10.0, 0.1)


@pytest.fixture(scope="session")
def r1_profile(r1_params):
    return solve_profile(r1_params)


@pytest.fixture(scope="session")
def r2_profile(r2_params):
    return solve_profile(r2_params)


def _perturbed_config(params, **kw):
    """Standard perturbed run: Gaussian at the front, amplitude 0.05 delta,
    velocity component aligned with the incoming wave family."""
    base = dict(
        v_plus=params.v_plus,
        u_plus=params.u_plus,
        mu=params.mu,
        kappa=params.kappa,
        kind="bump",
        amplitude=0.05 * params.delta,
        width=1.0,
        u_factor=-params.s,
        t_final=50.0,
        N=1600,
        series_every=2,
    )
    base.update(kw)
    return RunConfig(**base)


class RunBundle:
    def __init__(self, setup, records, final):
        self.setup = setup
        self.records = records
        self.final = final


@pytest.fixture(scope="session")
def run8(r1_params, r1_profile, tmp_path_factory):
    cfg = _perturbed_config(r1_params)
    setup = prepare(cfg, profile=r1_profile)
    out = tmp_path_factory.mktemp("run8")
    records, final = simulate(setup, out_dir=str(out))
    bundle = RunBundle(setup, records, final)
    bundle.out_dir = out
    return bundle


@pytest.fixture(scope="session")
def run8_halved(run8, r1_params, r1_profile, tmp_path_factory):
    res = run8.setup.config
    cfg = _perturbed_config(r1_params, N=2 * res.N, L=res.L, beta=res.beta)
    setup = prepare(cfg, profile=r1_profile)
    out = tmp_path_factory.mktemp("run8_halved")
    records, final = simulate(setup, out_dir=str(out))
    return RunBundle(setup, records, final)


@pytest.fixture(scope="session")
def run8_double_length(run8, r1_params, r1_profile, tmp_path_factory):
    res = run8.setup.config
    cfg = _perturbed_config(r1_params, N=2 * res.N, L=2.0 * res.L, beta=res.beta)
    setup = prepare(cfg, profile=r1_profile)
    out = tmp_path_factory.mktemp("run8_dblL")
    records, final = simulate(setup, out_dir=str(out))
    return RunBundle(setup, records, final)


@pytest.fixture(scope="session")
def refinement(r1_params):
    cfg = RunConfig(
        v_plus=r1_params.v_plus,
        u_plus=r1_params.u_plus,
        mu=r1_params.mu,
        kappa=r1_params.kappa,
        t_final=50.0,
        N=1600,
    )
    return refinement_study(cfg, levels=3, factor=2)
