import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from logperiodic.exceptions import InvalidConfig, SingularAtCritical
from logperiodic.model import (
    ModelParams,
    Side,
    distance_to_critical,
    evaluate_model,
    evaluate_pi,
    oscillation,
    to_amplitude_phase,
)

finite = dict(allow_nan=False, allow_infinity=False)
coef = st.floats(-100, 100, **finite)
lams = st.floats(1.05, 10.0, **finite)
alphas = st.floats(0.05, 1.5, **finite)


@st.composite
def params(draw):
    return ModelParams(
        t_crit=draw(st.floats(1900, 2100, **finite)),
        alpha=draw(alphas),
        lam=draw(lams),
        p_crit=draw(coef),
        a_env=draw(coef),
        c_cos=draw(coef),
        d_sin=draw(coef),
    )


@pytest.mark.parametrize("t, tc, expected", [(2008.0, 2010.75, 2.75), (2010.75, 2010.75, 0.0), (2012.0, 2010.75, 1.25)])
def test_distance_to_critical(t, tc, expected):
    assert distance_to_critical(t, tc) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize(
    "y, a_env, amplitude, expected",
    [(0.0, 0.0, 2.0, 2.0), (1.0, 0.0, 2.0, 2.0), (0.25, 1.0, 2.0, 1.0)],
)
def test_evaluate_pi_examples(y, a_env, amplitude, expected):
    p = ModelParams.from_amplitude_phase(amplitude, 0.0, t_crit=0.0, alpha=0.5, a_env=a_env)
    assert evaluate_pi(y, p) == pytest.approx(expected, abs=1e-12)


def test_evaluate_pi_matches_model_bracket():
    p = ModelParams(t_crit=10.0, alpha=0.7, lam=2.0, p_crit=3.0, a_env=1.5, c_cos=0.4, d_sin=-0.9)
    x = np.array([0.3, 1.0, 2.5, 7.0])
    y = np.log(x) / np.log(p.lam)
    model = evaluate_model(p, p.t_crit - x)
    assert np.allclose(model, p.p_crit + x**p.alpha * evaluate_pi(y, p), rtol=1e-13)


def test_evaluate_model_examples():
    pure = ModelParams(t_crit=10.0, alpha=1.0, a_env=1.0)
    assert evaluate_model(pure, 7.0) == pytest.approx(3.0)
    osc = ModelParams(t_crit=10.0, alpha=0.0, lam=2.0, p_crit=5.0, c_cos=2.0)
    assert evaluate_model(osc, 9.0) == pytest.approx(7.0, abs=1e-12)
    assert evaluate_model(osc, 8.0) == pytest.approx(7.0, abs=1e-12)


def test_evaluate_model_at_critical_time():
    p = ModelParams(t_crit=10.0, alpha=0.5, p_crit=4.0, a_env=1.0, c_cos=1.0)
    assert evaluate_model(p, 10.0) == 4.0
    with pytest.raises(SingularAtCritical):
        evaluate_model(p.replace(alpha=0.0), 10.0)
    with pytest.raises(SingularAtCritical):
        evaluate_model(p.replace(alpha=-0.3), np.array([9.0, 10.0]))


@pytest.mark.parametrize(
    "c, d, amplitude, phase",
    [(3.0, 0.0, 3.0, 0.0), (0.0, 1.0, 1.0, math.pi / 2), (1.0, 1.0, math.sqrt(2), math.pi / 4), (0.0, 0.0, 0.0, 0.0)],
)
def test_to_amplitude_phase_examples(c, d, amplitude, phase):
    b, phi = to_amplitude_phase(ModelParams(t_crit=0.0, alpha=0.5, c_cos=c, d_sin=d))
    assert b == pytest.approx(amplitude, abs=1e-15)
    assert phi == pytest.approx(phase, abs=1e-15)


def test_invalid_lambda_rejected():
    with pytest.raises(InvalidConfig):
        ModelParams(t_crit=0.0, alpha=0.5, lam=1.0)
    with pytest.raises(InvalidConfig):
        ModelParams(t_crit=0.0, alpha=0.5, lam=0.5)


def test_side_parsing():
    assert Side.parse("post") is Side.POST
    assert ModelParams(t_crit=0.0, alpha=0.5, side="pre").side is Side.PRE
    with pytest.raises(InvalidConfig):
        Side.parse("sideways")


def test_dict_round_trip():
    p = ModelParams(t_crit=2010.0, alpha=0.4, lam=1.7, p_crit=1.0, a_env=-2.0, c_cos=0.3, d_sin=0.2, side="post")
    assert ModelParams.from_dict(p.as_dict()) == p


@given(params(), st.floats(1e-3, 1e3, **finite))
def test_log_periodicity(p, x):
    amplitude = math.hypot(p.c_cos, p.d_sin)
    assert abs(oscillation(p.lam * x, p) - oscillation(x, p)) <= 1e-12 * amplitude


@given(params(), st.integers(-2**20, 2**20), st.integers(1, 2**20))
def test_mirror_symmetry_exact(p, tc_units, d_units):
    # dyadic inputs keep t_crit +/- d exact in binary floating point
    p = p.replace(t_crit=tc_units / 1024.0)
    d = d_units / 1024.0
    assert evaluate_model(p, p.t_crit + d) == evaluate_model(p, p.t_crit - d)


@given(params(), st.floats(-50, 50, **finite))
def test_mirror_symmetry_via_distance(p, d):
    # for arbitrary floats, equal distances give identical values
    t_plus, t_minus = p.t_crit + d, p.t_crit - d
    if distance_to_critical(t_plus, p.t_crit) == distance_to_critical(t_minus, p.t_crit) and d != 0:
        assert evaluate_model(p, t_plus) == evaluate_model(p, t_minus)


@given(params(), st.floats(1e-3, 100, **finite))
def test_envelope_bound(p, x):
    amplitude, _ = to_amplitude_phase(p)
    value = evaluate_model(p, p.t_crit - x)
    bound = x**p.alpha * (abs(p.a_env) + amplitude)
    assert abs(value - p.p_crit) <= bound * (1 + 1e-12) + 1e-12 * abs(p.p_crit)


@given(st.floats(-1e3, 1e3, **finite), st.floats(-1e3, 1e3, **finite))
def test_amplitude_phase_round_trip(c, d):
    p = ModelParams(t_crit=0.0, alpha=0.5, c_cos=c, d_sin=d)
    b, phi = to_amplitude_phase(p)
    assert b >= 0 and 0 <= phi < 2 * math.pi
    assert b * math.cos(phi) == pytest.approx(c, abs=1e-12 * max(1.0, b))
    assert b * math.sin(phi) == pytest.approx(d, abs=1e-12 * max(1.0, b))


@settings(max_examples=50)
@given(st.floats(-1e3, 1e3, **finite), st.floats(-1e3, 1e3, **finite), st.floats(-20, 20, **finite))
def test_amplitude_phase_identity(c, d, theta):
    b, phi = to_amplitude_phase(ModelParams(t_crit=0.0, alpha=0.5, c_cos=c, d_sin=d))
    lhs = c * math.cos(theta) + d * math.sin(theta)
    assert lhs == pytest.approx(b * math.cos(theta - phi), abs=1e-9 * max(1.0, b))
