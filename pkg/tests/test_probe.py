import numpy as np
import pytest

from conftest import free_family, probe_times
from dressedstates.dressed import DressedTrajectory, depletion_amplitudes, dressed_dipole_matrices
from dressedstates.errors import ConfigError, DepletionSingularityError
from dressedstates.probe import (dipole_response, final_probability, running_amplitudes,
                                 transition_amplitude, transition_amplitudes)
from dressedstates.propagator import PropagationPlan, propagate
from dressedstates.pulses import PulseParams, support

PROBE = PulseParams(1e-3, 1.34, 10.84)


@pytest.fixture(scope="module")
def free(default_system):
    return free_family(default_system.basis, probe_times(PROBE))


def _tdse_probe_only(system, i, probe):
    lo, hi = support(probe)
    t0, t1 = np.floor(lo - 1.0), np.ceil(hi + 1.0)
    plan = PropagationPlan(dt=0.02, t_start=t0, t_end=t1, fields=(probe,), sample_stride=10 ** 6)
    tr = propagate(system.basis.state(i), system.pot, plan)
    return np.abs(system.basis.project(tr.final)) ** 2


def test_zero_probe_gives_zero(free):
    assert transition_amplitude(0, 1, free, PROBE.scaled(0.0)) == 0j


def test_linear_in_probe_amplitude(free):
    a1 = transition_amplitude(0, 1, free, PROBE)
    a2 = transition_amplitude(0, 1, free, PROBE.scaled(2e-3))
    assert abs(a2 - 2 * a1) <= 1e-12 * abs(a2)
    p1 = final_probability(1, 0, free, PROBE)
    p2 = final_probability(1, 0, free, PROBE.scaled(2e-3))
    assert p2 / p1 == pytest.approx(4.0, rel=1e-10)


@pytest.mark.parametrize("i, f", [(0, 1), (1, 0)])
def test_matches_probe_only_tdse(default_system, free, i, f):
    pops = _tdse_probe_only(default_system, i, PROBE)
    p_model = final_probability(i, f, free, PROBE)
    assert p_model == pytest.approx(pops[f], rel=0.02)
    alpha = transition_amplitude(i, f, free, PROBE)
    assert abs(alpha) ** 2 == pytest.approx(p_model, rel=1e-12)


def test_quadrature_converged(default_system):
    coarse = free_family(default_system.basis, probe_times(PROBE, 0.1))
    fine = free_family(default_system.basis, probe_times(PROBE, 0.05))
    p_c = final_probability(0, 1, coarse, PROBE)
    p_f = final_probability(0, 1, fine, PROBE)
    assert abs(p_c / p_f - 1) < 1e-4


def _rephased(fam, runs, basis, theta):
    coeffs = fam.coeffs * np.exp(1j * np.asarray(theta))[None, None, :]
    out = DressedTrajectory(fam.family, fam.times, coeffs, dipole=dressed_dipole_matrices(coeffs, basis))
    out.amplitudes = depletion_amplitudes(out, runs, basis)
    return out


def test_phase_convention_invariance(small_system, small_laser_data):
    runs, fams = small_laser_data
    probe = PulseParams(1e-3, 1.34, 10.84, 5.0)
    for tag in ("a", "d", "p"):
        fam = fams[tag]
        other = _rephased(fam, runs, small_system.basis, [0.3, -1.1, 2.5])
        for i, f in ((0, 1), (1, 0), (1, 1)):
            p = final_probability(i, f, fam, probe)
            q = final_probability(i, f, other, probe)
            assert abs(p - q) <= 1e-12 * max(p, 1e-300) + 1e-300, (tag, i, f)
        d1 = dipole_response(1, fam, probe)
        d2 = dipole_response(1, other, probe)
        assert np.abs(d1 - d2).max() < 1e-12


def test_running_amplitudes_end_value(small_laser_data):
    _, fams = small_laser_data
    fam = fams["p"]
    probe = PulseParams(1e-3, 1.34, 10.84, -3.0)
    run = running_amplitudes(1, fam, probe)
    ends = transition_amplitudes(1, fam, probe)
    assert np.allclose(run[-1], ends.alpha, rtol=1e-10, atol=1e-16)
    assert ends.alpha[1] == fam.amplitudes[-1, 1]


def test_depletion_guard(free):
    fam = DressedTrajectory("u", free.times, free.coeffs, amplitudes=free.amplitudes.copy(), dipole=free.dipole)
    lo, hi = support(PROBE)
    k = np.flatnonzero(fam.times > 0.5 * hi)[0]
    fam.amplitudes[k, 2] = 1e-5
    with pytest.raises(DepletionSingularityError) as info:
        transition_amplitude(0, 2, fam, PROBE)
    assert info.value.state == 2
    assert info.value.time == pytest.approx(fam.times[k])
    assert str(fam.times[k])[:4] in str(info.value)
    # a depleted state outside the probe support is harmless
    fam.amplitudes[k, 2] = free.amplitudes[k, 2]
    fam.amplitudes[0, 2] = 1e-5
    transition_amplitude(0, 2, fam, PROBE)


def test_argument_errors(free):
    with pytest.raises(ConfigError):
        transition_amplitude(1, 1, free, PROBE)
    bare = DressedTrajectory("u", free.times, free.coeffs)
    with pytest.raises(ConfigError):
        final_probability(1, 0, bare, PROBE)


def test_restricted_and_full_sums_agree_without_laser(free):
    p_r = final_probability(0, 1, free, PROBE)
    p_f = final_probability(0, 1, free, PROBE, restricted=False)
    assert p_f == pytest.approx(p_r, rel=1e-12)


def test_dipole_without_probe_vanishes(default_system):
    fam = free_family(default_system.basis, np.arange(-50, 50.001, 0.1))
    d = dipole_response(0, fam, PROBE.scaled(0.0), return_complex=True)
    assert np.abs(d).max() < 1e-9


def test_dipole_real_and_cross_variant(small_laser_data):
    _, fams = small_laser_data
    fam = fams["p"]
    probe = PulseParams(1e-3, 1.34, 10.84, 0.0)
    d = dipole_response(1, fam, probe, return_complex=True)
    assert np.abs(d.imag).max() < 1e-10
    cross = dipole_response(1, fam, probe, cross_only=True)
    alpha = running_amplitudes(1, fam, probe)
    assert np.allclose(d.real - cross, np.abs(alpha[:, 1]) ** 2 * fam.dipole[:, 1, 1].real, atol=1e-14)


def _zero_crossing_frequency(t, y):
    s = np.signbit(y)
    idx = np.flatnonzero(s[1:] != s[:-1])
    # linear interpolation of the crossing instants
    tc = t[idx] - y[idx] * (t[idx + 1] - t[idx]) / (y[idx + 1] - y[idx])
    return np.pi / np.mean(np.diff(tc))


def test_free_induction_frequency(default_system):
    basis = default_system.basis
    t = np.round(np.arange(-20.0, 120.0001, 0.1), 10)
    fam = free_family(basis, t)
    d = dipole_response(0, fam, PROBE)
    after = t > support(PROBE)[1] + 1.0
    w_model = _zero_crossing_frequency(t[after], d[after])
    assert w_model == pytest.approx(basis.energies[1] - basis.energies[0], abs=0.02)
    assert w_model == pytest.approx(1.34, abs=0.02)

    plan = PropagationPlan(dt=0.02, t_start=-20.0, t_end=120.0, fields=(PROBE,), sample_stride=5)
    tr = propagate(basis.state(0), default_system.pot, plan)
    after = tr.times > support(PROBE)[1] + 1.0
    w_tdse = _zero_crossing_frequency(tr.times[after], tr.dipoles[after])
    assert w_tdse == pytest.approx(w_model, abs=0.02)
    # amplitude of the oscillation agrees too (first order in the probe)
    amp_model = np.abs(d[t > 40]).max()
    amp_tdse = np.abs(tr.dipoles[tr.times > 40]).max()
    assert amp_model == pytest.approx(amp_tdse, rel=0.05)
