import numpy as np
import pytest

from conftest import BASE
from logperiodic.exceptions import InvalidConfig, NonPositiveGenerated
from logperiodic.ingest import parse_csv, to_csv
from logperiodic.model import ModelParams, evaluate_model
from logperiodic.synth import SynthConfig, clean_prices, generate, ramp, sample_times, superbubble_params


def test_noiseless_is_exact_model():
    series = generate(SynthConfig(BASE, 2000.0, 2008.0, step=0.01))
    assert np.array_equal(series.price, evaluate_model(BASE, series.t))


def test_seed_determinism():
    cfg = SynthConfig(BASE, 2000.0, 2008.0, noise_sigma_rel=0.01, seed=42)
    a, b = generate(cfg), generate(cfg)
    assert a == b
    assert generate(SynthConfig(BASE, 2000.0, 2008.0, noise_sigma_rel=0.01, seed=43)) != a


def test_generator_test_vector():
    # pins the documented generator: PCG64 seeded with 0, standard_normal
    draws = np.random.Generator(np.random.PCG64(0)).standard_normal(3)
    assert draws == pytest.approx([0.12573022, -0.13210486, 0.64042265], abs=1e-8)


def test_noise_standard_deviation():
    flat = ModelParams(t_crit=3000.0, alpha=0.5, p_crit=100.0)
    cfg = SynthConfig(flat, 0.0, 9999.0, step=1.0, noise_sigma_rel=0.01, seed=7)
    series = generate(cfg)
    assert len(series) == 10_000
    noise = series.price - clean_prices(cfg, series.t)
    sigma = 0.01 * 100.0
    assert abs(np.std(noise, ddof=1) - sigma) <= 0.05 * sigma


def test_non_positive_generated():
    with pytest.raises(NonPositiveGenerated):
        generate(SynthConfig(BASE.replace(p_crit=10.0), 2000.0, 2008.0, step=0.1))


@pytest.mark.parametrize(
    "kwargs", [dict(step=0.0), dict(step=-1.0), dict(noise_sigma_rel=-0.1), dict(t_from=2009.0), dict(seed=-1)]
)
def test_invalid_config(kwargs):
    base = dict(base=BASE, t_from=2000.0, t_to=2008.0)
    base.update(kwargs)
    with pytest.raises(InvalidConfig):
        SynthConfig(**base)


def test_ramp_shape():
    width = 30 / 365
    assert ramp(2007.0, 2007.5) == 0.0
    assert ramp(2007.5 + width / 2, 2007.5) == pytest.approx(0.5)
    assert ramp(2007.5 + 2 * width, 2007.5) == 1.0


def test_superbubble_overlay():
    overlay = superbubble_params(2008.53, 2007.5, height=6.0, alpha=0.5, oscillation=0.4)
    # envelope vanishes at the ramp start and reaches the height at t_crit
    assert overlay.p_crit + overlay.a_env * (2008.53 - 2007.5) ** 0.5 == pytest.approx(0.0, abs=1e-12)
    cfg = SynthConfig(BASE, 2006.0, 2008.45, superbubble=(overlay, 2007.5))
    t = sample_times(cfg)
    diff = clean_prices(cfg, t) - evaluate_model(BASE, t)
    assert np.all(diff[t <= 2007.5] == 0.0)
    late = t >= 2007.5 + 30 / 365
    assert np.allclose(diff[late], evaluate_model(overlay, t[late]), rtol=1e-12, atol=1e-12)

    zero = superbubble_params(2008.53, 2007.5, height=0.0)
    cfg0 = SynthConfig(BASE, 2006.0, 2008.45, superbubble=(zero, 2007.5))
    assert np.array_equal(generate(cfg0).price, generate(SynthConfig(BASE, 2006.0, 2008.45)).price)


def test_csv_round_trip_with_day_snapping():
    cfg = SynthConfig(BASE, 2007.9, 2008.2, noise_sigma_rel=0.01, seed=3, snap_to_days=True)
    series = generate(cfg)
    assert parse_csv(to_csv(series), label=series.label) == series
