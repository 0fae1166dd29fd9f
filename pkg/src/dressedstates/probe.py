"""First-order probe transitions between dressed bound states.

For n != i the amplitude to end in phi_n is

    alpha_ni(t) = -i a_n(t) * integral_{t0}^{t} E_probe(t') a_i(t')/a_n(t') Z_ni(t') dt'

evaluated by the trapezoid rule on the dressed sampling grid; alpha_ii is
taken as the surviving amplitude a_i(t). Transition probabilities to a
field-free state |f> sum alpha_ni <f|phi_n(t_f)> over n <= max(i, f) by
default, which keeps strongly depleted upper states out of the sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, trapezoid

from .dressed import DressedTrajectory
from .errors import ConfigError, DepletionSingularityError
from .pulses import PulseParams, electric_field, support

AMP_FLOOR = 1e-3


@dataclass(frozen=True)
class TransitionAmplitudes:
    initial: int
    t_f: float
    alpha: np.ndarray


def _check_family(family):
    if family.amplitudes is None or family.dipole is None:
        raise ConfigError(f"family {family.family!r} has no depletion amplitudes or dipole matrices")


def _final_index(family, t_f):
    return len(family.times) - 1 if t_f is None else family.index_of(t_f)


def _probe_window(family, probe, stop):
    """Sample indices covering the probe support (plus one sample each side), up to ``stop``."""
    lo, hi = support(probe)
    t = family.times[:stop + 1]
    step = t[1] - t[0] if len(t) > 1 else 0.0
    return np.flatnonzero((t >= lo - step) & (t <= hi + step))


def _guard(family, n, idx, efield, amp_floor):
    a_n = np.abs(family.amplitudes[idx, n])
    bad = (efield != 0.0) & (a_n < amp_floor)
    if np.any(bad):
        t_bad = family.times[idx][np.argmax(bad)]
        raise DepletionSingularityError(
            f"|a_{n}| = {a_n[np.argmax(bad)]:.3g} < {amp_floor} at t' = {t_bad:.6g} "
            f"(family {family.family})", state=n, time=float(t_bad))


def _integrand(i, n, family, idx, efield):
    a = family.amplitudes[idx]
    return efield * a[:, i] / a[:, n] * family.dipole[idx, n, i]


def transition_amplitude(i: int, n: int, family: DressedTrajectory, probe: PulseParams,
                         t_f: float | None = None, amp_floor: float = AMP_FLOOR) -> complex:
    """alpha_ni(t_f) for n != i."""
    if n == i:
        raise ConfigError("transition_amplitude needs n != i; alpha_ii is a_i(t_f)")
    _check_family(family)
    kf = _final_index(family, t_f)
    idx = _probe_window(family, probe, kf)
    if len(idx) < 2:
        return 0j
    efield = electric_field(probe, family.times[idx])
    _guard(family, n, idx, efield, amp_floor)
    integral = trapezoid(_integrand(i, n, family, idx, efield), family.times[idx])
    return complex(-1j * family.amplitudes[kf, n] * integral)


def transition_amplitudes(i: int, family: DressedTrajectory, probe: PulseParams,
                          t_f: float | None = None, n_max: int | None = None,
                          amp_floor: float = AMP_FLOOR) -> TransitionAmplitudes:
    _check_family(family)
    kf = _final_index(family, t_f)
    n_max = family.n_states - 1 if n_max is None else n_max
    alpha = np.empty(n_max + 1, complex)
    for n in range(n_max + 1):
        if n == i:
            alpha[n] = family.amplitudes[kf, i]
        else:
            alpha[n] = transition_amplitude(i, n, family, probe, family.times[kf], amp_floor)
    return TransitionAmplitudes(initial=i, t_f=float(family.times[kf]), alpha=alpha)


def final_probability(i: int, f: int, family: DressedTrajectory, probe: PulseParams,
                      t_f: float | None = None, restricted: bool = True,
                      amp_floor: float = AMP_FLOOR) -> float:
    """p_fi = |sum_n alpha_ni(t_f) <f|phi_n(t_f)>|^2.

    ``restricted`` limits the sum to n <= max(i, f); otherwise every basis
    state is included.
    """
    n_max = max(i, f) if restricted else family.n_states - 1
    amps = transition_amplitudes(i, family, probe, t_f, n_max, amp_floor)
    kf = _final_index(family, t_f)
    overlap = family.coeffs[kf, f, :n_max + 1]
    return float(abs(np.dot(amps.alpha, overlap)) ** 2)


def running_amplitudes(i: int, family: DressedTrajectory, probe: PulseParams,
                       n_max: int | None = None, amp_floor: float = AMP_FLOOR) -> np.ndarray:
    """alpha_ni(t) at every sample, shape (n_times, n_max + 1)."""
    _check_family(family)
    n_max = family.n_states - 1 if n_max is None else n_max
    t = family.times
    efield = electric_field(probe, t)
    active = efield != 0.0
    alpha = np.empty((len(t), n_max + 1), complex)
    for n in range(n_max + 1):
        if n == i:
            alpha[:, n] = family.amplitudes[:, i]
            continue
        _guard(family, n, np.arange(len(t)), efield, amp_floor)
        integrand = np.zeros(len(t), complex)
        integrand[active] = _integrand(i, n, family, np.flatnonzero(active), efield[active])
        alpha[:, n] = -1j * family.amplitudes[:, n] * cumulative_trapezoid(integrand, t, initial=0.0)
    return alpha


def dipole_response(i: int, family: DressedTrajectory, probe: PulseParams,
                    n_max: int | None = None, cross_only: bool = False,
                    amp_floor: float = AMP_FLOOR, return_complex: bool = False):
    """d(t) = sum_mn conj(alpha_mi) Z_mn alpha_ni on the family's sampling.

    With ``cross_only`` the m = n = i term (the laser-only dipole of the
    surviving initial state) is left out.
    """
    alpha = running_amplitudes(i, family, probe, n_max, amp_floor)
    k = alpha.shape[1]
    z = family.dipole[:, :k, :k]
    d = np.einsum("tm,tmn,tn->t", alpha.conj(), z, alpha)
    if cross_only:
        d = d - np.abs(alpha[:, i]) ** 2 * z[:, i, i]
    return d if return_complex else d.real
