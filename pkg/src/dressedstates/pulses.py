"""cos^2-envelope pulses defined through their vector potential.

    A(t) = -A_max cos^2(x/T) sin(omega x),   x = t - t_center,  |x| < pi T / 2

and A = 0 elsewhere, with A_max = E_max / omega. The field E = -dA/dt is
evaluated analytically. Everything is in atomic units.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

FWHM_FACTOR = 2.0 * math.acos(2.0 ** -0.25)


@dataclass(frozen=True)
class PulseParams:
    e_max: float
    omega: float
    t_env: float
    t_center: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.e_max, self.omega, self.t_env, self.t_center)):
            raise ConfigError(f"pulse parameters must be finite: {self}")
        if not self.t_env > 0:
            raise ConfigError(f"pulse envelope T must be positive, got {self.t_env}")
        if not self.omega > 0:
            raise ConfigError(f"pulse omega must be positive, got {self.omega}")

    @property
    def a_max(self) -> float:
        return self.e_max / self.omega

    @property
    def half_width(self) -> float:
        return 0.5 * math.pi * self.t_env

    def shifted(self, t_center: float) -> PulseParams:
        return PulseParams(self.e_max, self.omega, self.t_env, t_center)

    def scaled(self, e_max: float) -> PulseParams:
        return PulseParams(e_max, self.omega, self.t_env, self.t_center)


def fwhm_to_envelope_T(fwhm: float) -> float:
    """Envelope parameter T from the FWHM of the intensity envelope cos^4."""
    if not fwhm > 0:
        raise ConfigError(f"FWHM must be positive, got {fwhm}")
    return fwhm / FWHM_FACTOR


def support(p: PulseParams) -> tuple[float, float]:
    return p.t_center - p.half_width, p.t_center + p.half_width


def _inside(p, t):
    x = np.asarray(t, dtype=float) - p.t_center
    return x, np.abs(x) < p.half_width


def _scalar_or_array(v):
    return float(v) if v.ndim == 0 else v


def vector_potential(p: PulseParams, t):
    x, inside = _inside(p, t)
    xs = np.where(inside, x, 0.0)
    a = -p.a_max * np.cos(xs / p.t_env) ** 2 * np.sin(p.omega * xs)
    return _scalar_or_array(np.where(inside, a, 0.0))


def electric_field(p: PulseParams, t):
    x, inside = _inside(p, t)
    xs = np.where(inside, x, 0.0)
    u = xs / p.t_env
    wx = p.omega * xs
    e = p.a_max * (p.omega * np.cos(u) ** 2 * np.cos(wx) - np.sin(2.0 * u) * np.sin(wx) / p.t_env)
    return _scalar_or_array(np.where(inside, e, 0.0))


def total_field(pulses, t):
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    for p in pulses:
        out = out + electric_field(p, t)
    return out
