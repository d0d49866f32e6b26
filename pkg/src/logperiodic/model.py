"""Log-periodic power-law model: parameter container and pure evaluators.

The model of a price around a critical time ``t_crit`` is::

    p(t) = p_crit + x**alpha * (a_env + c_cos*cos(omega*ln x) + d_sin*sin(omega*ln x))

with ``x = |t - t_crit|`` and ``omega = 2*pi / ln(lam)``, so the oscillatory
factor repeats exactly each time ``x`` is multiplied by ``lam``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .exceptions import InvalidConfig, SingularAtCritical

TWO_PI = 2.0 * math.pi


class Side(str, Enum):
    """Which side of the critical time a data window lies on."""

    PRE = "pre"  # t < t_crit, oscillations accelerate toward t_crit
    POST = "post"  # t > t_crit, oscillations decelerate away from t_crit

    @classmethod
    def parse(cls, value: "Side | str") -> "Side":
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        aliases = {"pre": cls.PRE, "precritical": cls.PRE, "post": cls.POST, "postcritical": cls.POST}
        if key not in aliases:
            raise InvalidConfig(f"unknown side {value!r}; expected 'pre' or 'post'")
        return aliases[key]


def angular_log_frequency(lam: float) -> float:
    """omega = 2*pi / ln(lam): one full oscillation per factor ``lam`` in x."""
    if not lam > 1.0 or not math.isfinite(lam):
        raise InvalidConfig(f"scaling factor must be finite and > 1, got {lam!r}")
    return TWO_PI / math.log(lam)


@dataclass(frozen=True)
class ModelParams:
    t_crit: float
    alpha: float
    lam: float = 2.0
    p_crit: float = 0.0
    a_env: float = 0.0
    c_cos: float = 0.0
    d_sin: float = 0.0
    side: Side = Side.PRE

    def __post_init__(self):
        object.__setattr__(self, "side", Side.parse(self.side))
        angular_log_frequency(self.lam)
        for name in ("t_crit", "alpha", "p_crit", "a_env", "c_cos", "d_sin"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidConfig(f"{name} must be finite")

    @property
    def omega(self) -> float:
        return angular_log_frequency(self.lam)

    @property
    def amplitude(self) -> float:
        return to_amplitude_phase(self)[0]

    @property
    def phase(self) -> float:
        return to_amplitude_phase(self)[1]

    def replace(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    @classmethod
    def from_amplitude_phase(cls, amplitude: float, phase: float, **fields) -> "ModelParams":
        """Build params from the (B, phi) form instead of (c_cos, d_sin)."""
        return cls(c_cos=amplitude * math.cos(phase), d_sin=amplitude * math.sin(phase), **fields)

    def as_dict(self) -> dict:
        amplitude, phase = to_amplitude_phase(self)
        return {
            "t_crit": self.t_crit,
            "alpha": self.alpha,
            "lambda": self.lam,
            "omega": self.omega,
            "p_crit": self.p_crit,
            "a_env": self.a_env,
            "c_cos": self.c_cos,
            "d_sin": self.d_sin,
            "amplitude": amplitude,
            "phase": phase,
            "side": self.side.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        return cls(
            t_crit=float(data["t_crit"]),
            alpha=float(data["alpha"]),
            lam=float(data.get("lambda", data.get("lam", 2.0))),
            p_crit=float(data.get("p_crit", 0.0)),
            a_env=float(data.get("a_env", 0.0)),
            c_cos=float(data.get("c_cos", 0.0)),
            d_sin=float(data.get("d_sin", 0.0)),
            side=Side.parse(data.get("side", "pre")),
        )


def distance_to_critical(t, t_crit: float):
    """Distance ``x = |t - t_crit|``; works on scalars and arrays."""
    return np.abs(np.subtract(t, t_crit))


def to_amplitude_phase(params: ModelParams) -> tuple[float, float]:
    """Return (B, phi) with c*cos(th) + d*sin(th) == B*cos(th - phi), phi in [0, 2pi)."""
    c, d = params.c_cos, params.d_sin
    amplitude = math.hypot(c, d)
    if amplitude == 0.0:
        return 0.0, 0.0
    phase = math.atan2(d, c) % TWO_PI
    if phase >= TWO_PI:  # -tiny % 2pi can round up to 2pi
        phase = 0.0
    return amplitude, phase


def evaluate_pi(y, params: ModelParams):
    """Periodic factor as a function of the log-scale coordinate y = ln(x)/ln(lam).

    Equals ``a_env + B*cos(2*pi*y - phi)``, i.e. exactly the bracket of the
    full model evaluated at ``x = lam**y``; period 1 in ``y``.
    """
    theta = TWO_PI * np.asarray(y, dtype=float)
    out = params.a_env + params.c_cos * np.cos(theta) + params.d_sin * np.sin(theta)
    return float(out) if out.ndim == 0 else out


def oscillation(x, params: ModelParams):
    """c_cos*cos(omega ln x) + d_sin*sin(omega ln x) for x > 0."""
    phase = params.omega * np.log(np.asarray(x, dtype=float))
    out = params.c_cos * np.cos(phase) + params.d_sin * np.sin(phase)
    return float(out) if out.ndim == 0 else out


def evaluate_model(params: ModelParams, t):
    """Evaluate the model price at time(s) ``t``.

    At ``x == 0`` the value is ``p_crit`` when ``alpha > 0``; otherwise
    :class:`SingularAtCritical` is raised.
    """
    x = distance_to_critical(np.asarray(t, dtype=float), params.t_crit)
    at_crit = x == 0.0
    if np.any(at_crit) and params.alpha <= 0.0:
        raise SingularAtCritical(
            f"x = 0 at t = {params.t_crit} with alpha = {params.alpha} <= 0"
        )
    safe_x = np.where(at_crit, 1.0, x)
    envelope = safe_x ** params.alpha
    bracket = params.a_env + oscillation(safe_x, params)
    out = np.where(at_crit, params.p_crit, params.p_crit + envelope * bracket)
    return float(out) if out.ndim == 0 else out
