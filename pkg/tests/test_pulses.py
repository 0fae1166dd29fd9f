import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from dressedstates.errors import ConfigError
from dressedstates.pulses import (PulseParams, electric_field, fwhm_to_envelope_T, support, total_field,
                                  vector_potential)

LASER = PulseParams(0.02, 0.06, 126.78)
PROBE = PulseParams(1e-3, 1.34, 10.84, 30.0)


def test_support():
    lo, hi = support(LASER)
    assert lo == pytest.approx(-199.14, abs=0.01)
    assert hi == pytest.approx(199.14, abs=0.01)
    assert support(PROBE) == pytest.approx((30.0 - 17.027, 30.0 + 17.027), abs=1e-3)


def test_zero_outside_support():
    lo, hi = support(PROBE)
    t = np.array([lo - 5.0, lo, hi, hi + 1.0])
    assert np.all(electric_field(PROBE, t) == 0.0)
    assert np.all(vector_potential(PROBE, t) == 0.0)


def test_scalar_in_scalar_out():
    assert isinstance(electric_field(LASER, 0.0), float)
    assert isinstance(vector_potential(LASER, 1.0), float)
    assert electric_field(LASER, 0.0) == pytest.approx(LASER.e_max)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.005, 0.1), st.floats(0.03, 2.0), st.floats(5.0, 200.0), st.floats(-0.99, 0.99))
def test_field_is_minus_derivative_of_vector_potential(e_max, omega, t_env, frac):
    p = PulseParams(e_max, omega, t_env, 3.0)
    t = 3.0 + frac * p.half_width
    h = 1e-4 * min(t_env, 1.0 / omega)
    if abs(t - 3.0) + h >= p.half_width:
        return
    fd = -(vector_potential(p, t + h) - vector_potential(p, t - h)) / (2 * h)
    assert electric_field(p, t) == pytest.approx(fd, rel=1e-6, abs=1e-9 * e_max)


def test_zero_field_area():
    lo, hi = support(LASER)
    area, _ = quad(lambda t: electric_field(LASER, t), lo, hi, limit=400)
    assert abs(area) < 1e-10


def test_fwhm_relation():
    assert fwhm_to_envelope_T(144.9) == pytest.approx(126.78, rel=1e-3)
    assert fwhm_to_envelope_T(12.39) == pytest.approx(10.84, rel=1e-3)
    assert fwhm_to_envelope_T(2 * 37.0) == pytest.approx(2 * fwhm_to_envelope_T(37.0))
    # cos^4 falls to one half at x = FWHM / 2
    half = 0.5 * 144.9
    assert math.cos(half / fwhm_to_envelope_T(144.9)) ** 4 == pytest.approx(0.5)
    with pytest.raises(ConfigError):
        fwhm_to_envelope_T(0.0)


def test_validation_and_helpers():
    with pytest.raises(ConfigError):
        PulseParams(0.02, 0.06, 0.0)
    with pytest.raises(ConfigError):
        PulseParams(0.02, -1.0, 10.0)
    assert PROBE.shifted(-5.0).t_center == -5.0
    assert LASER.scaled(0.04).e_max == 0.04
    assert LASER.a_max == pytest.approx(0.02 / 0.06)


def test_total_field_superposes():
    t = np.linspace(-50, 50, 101)
    assert np.allclose(total_field([LASER, PROBE], t), electric_field(LASER, t) + electric_field(PROBE, t))
    assert np.all(total_field([], t) == 0.0)
