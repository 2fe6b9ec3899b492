"""End states, shock speed, entropy and existence margins."""

import numpy as np
import pytest

from nskshock.errors import (
    InconsistentParamsError,
    NotATwoShockError,
    VacuumExceededError,
)
from nskshock.model import (
    ModelParams,
    PressureLaw,
    char_speed,
    lax_entropy_margin,
    profile_existence_margin,
    solve_rankine_hugoniot,
)

GAMMA_LAW = PressureLaw(1.0, 1.0)


def test_pressure_law_values_and_derivatives():
    p = PressureLaw(2.0, 1.4)
    for v in (0.5, 1.0, 3.7):
        assert p(v) == pytest.approx(2.0 * v**-1.4, rel=1e-14)
        assert p.dp(v) == pytest.approx(-2.8 * v**-2.4, rel=1e-14)
        assert p.d2p(v) == pytest.approx(2.8 * 2.4 * v**-3.4, rel=1e-14)


def test_pressure_law_rejects_bad_exponent():
    with pytest.raises(ValueError):
        PressureLaw(1.0, 0.5)
    with pytest.raises(ValueError):
        PressureLaw(-1.0, 1.0)


def test_char_speed_closed_form():
    # lambda_2 = sqrt(-p'(v)) = sqrt(p0 gamma) v^(-(gamma+1)/2)
    assert char_speed(GAMMA_LAW, 1.0) == pytest.approx(1.0, rel=1e-14)
    assert char_speed(GAMMA_LAW, 2.0) == pytest.approx(0.5, rel=1e-14)
    got = char_speed(PressureLaw(2.0, 3.0), 1.5)
    assert got == pytest.approx(np.sqrt(6.0) * 1.5**-2.0, rel=1e-13)


def test_weak_reference_shock(r1_params):
    # (1/v - 1/1.1)(1.1 - v) = 1/110 is solved by v = 1 exactly
    assert abs(r1_params.v_minus - 1.0) <= 1e-12
    assert r1_params.s == pytest.approx(10.0 / np.sqrt(110.0), rel=5e-15)
    assert r1_params.u_minus == 0.0
    lax_p, lax_m = lax_entropy_margin(r1_params)
    assert lax_p == pytest.approx(10.0 / np.sqrt(110.0) - 10.0 / 11.0, abs=1e-12)
    assert lax_m == pytest.approx(1.0 - 10.0 / np.sqrt(110.0), abs=1e-12)
    assert profile_existence_margin(r1_params) == pytest.approx(
        8.425409090909091, abs=1e-9
    )


def test_strong_reference_shock(r2_params):
    assert abs(r2_params.v_minus - 1.0) <= 1e-12
    assert r2_params.s == pytest.approx(np.sqrt(0.5), rel=5e-15)
    lax_p, lax_m = lax_entropy_margin(r2_params)
    assert lax_p == pytest.approx(np.sqrt(0.5) - 0.5, abs=1e-12)
    assert lax_m == pytest.approx(1.0 - np.sqrt(0.5), abs=1e-12)
    # mu^2 s^2 v_-^8 / kappa - (10 v_+/v_- - 6) v_+^5 (p'(v_+) + s^2)
    # = 500 - 14 * 32 * 1/4 = 388 in exact arithmetic
    assert profile_existence_margin(r2_params) == pytest.approx(388.0, abs=1e-9)


def test_jump_identities_random_sweep():
    """Both jump conditions close for random admissible data."""
    rng = np.random.default_rng(20260814)
    for _ in range(200):
        p0 = rng.uniform(0.3, 3.0)
        gam = rng.uniform(1.0, 3.0)
        v_plus = rng.uniform(0.4, 4.0)
        u_plus = -rng.uniform(0.01, 1.0)
        law = PressureLaw(p0, gam)
        pr = solve_rankine_hugoniot(law, v_plus, u_plus, 1.0, 0.1)
        assert 0.0 < pr.v_minus < pr.v_plus
        s = pr.s
        r_mass = s * (pr.v_plus - pr.v_minus) - (pr.u_minus - pr.u_plus)
        r_mom = s * (pr.u_plus - pr.u_minus) - (law(v_plus) - law(pr.v_minus))
        scale = max(abs(u_plus), law(pr.v_minus))
        assert abs(r_mass) <= 1e-12 * max(1.0, scale)
        assert abs(r_mom) <= 1e-12 * max(1.0, scale)
        lax_p, lax_m = lax_entropy_margin(pr)
        assert lax_p > 0.0 and lax_m > 0.0


def test_expansion_data_rejected():
    with pytest.raises(NotATwoShockError):
        solve_rankine_hugoniot(GAMMA_LAW, 1.1, +0.1, 1.0, 0.1)


def test_vacuum_strength_data_rejected():
    # back volume would have to drop below the bisection floor
    with pytest.raises(VacuumExceededError):
        solve_rankine_hugoniot(GAMMA_LAW, 1.0, -1e7, 1.0, 0.1)
    with pytest.raises(VacuumExceededError):
        solve_rankine_hugoniot(PressureLaw(1e-30, 1.0), 1.0, -1.0, 1.0, 0.1)


def test_very_strong_shock_still_closes():
    pr = solve_rankine_hugoniot(GAMMA_LAW, 1.0, -1e5, 1.0, 0.1)
    assert pr.v_minus == pytest.approx(1e-10, rel=1e-6)


def test_validate_catches_tampered_speed(r1_params):
    bad = ModelParams(
        pressure=r1_params.pressure,
        v_plus=r1_params.v_plus,
        u_plus=r1_params.u_plus,
        v_minus=r1_params.v_minus,
        s=r1_params.s * 1.001,
        mu=r1_params.mu,
        kappa=r1_params.kappa,
    )
    with pytest.raises(InconsistentParamsError):
        bad.validate()


def test_delta_property(r1_params, r2_params):
    assert r1_params.delta == pytest.approx(0.1, abs=1e-12)
    assert r2_params.delta == pytest.approx(1.0, abs=1e-12)
