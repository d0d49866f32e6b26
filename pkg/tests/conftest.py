import math

import numpy as np
import pytest

from logperiodic.fit import DAY, FitConfig
from logperiodic.model import ModelParams
from logperiodic.synth import SynthConfig, generate

# Long-term pre-critical bubble used by the recovery tests: oscillation
# amplitude is 10% of the envelope coefficient.
BASE = ModelParams(
    t_crit=2010.75,
    alpha=0.6,
    lam=2.0,
    p_crit=150.0,
    a_env=-25.0,
    c_cos=2.5 * math.cos(1.0),
    d_sin=2.5 * math.sin(1.0),
)
T_FROM, T_TO = 1999.5, 2008.4
FIT_CONFIG = FitConfig(tc_grid=(T_TO + DAY, 2012.0, DAY))

ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def noiseless_series():
    return generate(SynthConfig(BASE, T_FROM, T_TO))


@pytest.fixture
def small_series():
    """Weekly samples: cheap enough for property-style fitting tests."""
    return generate(SynthConfig(BASE, 2002.0, T_TO, step=7 * DAY, noise_sigma_rel=0.01, seed=11))


@pytest.fixture
def small_config():
    return FitConfig(tc_grid=(T_TO + DAY, 2012.0, 7 * DAY), refine_rounds=5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
