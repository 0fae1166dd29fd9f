"""Crank-Nicolson propagation of the length-gauge TDSE on the grid.

Each step solves

    (1 + i dt/2 H(t + dt/2)) psi(t + dt) = (1 - i dt/2 H(t + dt/2)) psi(t),

with H(t) = H0 + z * sum_i E_i(t). The tridiagonal solve is done by the
compiled kernel; several initial states under the same fields share the
elimination factors (``propagate_batch``).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from ._kernels import cn_step
from .errors import ConfigError, GridMismatchError, StabilityError
from .grid import Grid, Potential, Wavefunction, h0_tridiagonal
from .pulses import PulseParams, support, total_field
from .spectrum import BoundBasis

log = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-6
STRONG_FIELD_WARNING = 0.04


@dataclass(frozen=True)
class PropagationPlan:
    dt: float
    t_start: float
    t_end: float
    fields: tuple[PulseParams, ...] = ()
    sample_stride: int = 1
    absorber_enabled: bool = False
    absorber_width: float = 40.0

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}")
        if not self.t_end > self.t_start:
            raise ConfigError(f"t_end ({self.t_end}) must exceed t_start ({self.t_start})")
        ratio = (self.t_end - self.t_start) / self.dt
        if abs(ratio - round(ratio)) > 1e-9 * max(1.0, ratio):
            raise ConfigError(
                f"window [{self.t_start}, {self.t_end}] is not a whole number of steps of {self.dt}")
        if self.sample_stride < 1:
            raise ConfigError(f"sample_stride must be >= 1, got {self.sample_stride}")

    @property
    def n_steps(self) -> int:
        return int(round((self.t_end - self.t_start) / self.dt))

    def sample_steps(self) -> np.ndarray:
        steps = np.arange(0, self.n_steps + 1, self.sample_stride)
        if steps[-1] != self.n_steps:
            steps = np.append(steps, self.n_steps)
        return steps

    def sample_times(self) -> np.ndarray:
        return self.t_start + self.dt * self.sample_steps()


def aligned_window(pulses, spacing: float, pad: float = 1.0) -> tuple[float, float]:
    """Union of pulse supports padded by ``pad``, snapped outward to multiples of ``spacing``."""
    starts, ends = zip(*(support(p) for p in pulses))
    lo = math.floor((min(starts) - pad) / spacing + 1e-9)
    hi = math.ceil((max(ends) + pad) / spacing - 1e-9)
    return lo * spacing, hi * spacing


def default_plan(pulses, dt: float = 0.02, sample_stride: int = 5, **kwargs) -> PropagationPlan:
    t0, t1 = aligned_window(pulses, dt * sample_stride)
    return PropagationPlan(dt=dt, t_start=t0, t_end=t1, fields=tuple(pulses),
                           sample_stride=sample_stride, **kwargs)


@dataclass(eq=False)
class Trajectory:
    grid: Grid
    times: np.ndarray
    norms: np.ndarray
    dipoles: np.ndarray
    final: np.ndarray = field(repr=False)
    states: np.ndarray | None = field(default=None, repr=False)
    projections: np.ndarray | None = None

    @property
    def final_state(self) -> Wavefunction:
        return Wavefunction(self.final, self.grid)

    def state(self, k: int) -> Wavefunction:
        if self.states is None:
            raise ValueError("trajectory was run without keep_states")
        return Wavefunction(self.states[k], self.grid)


def absorber_mask(grid: Grid, width: float) -> np.ndarray:
    """cos^(1/8) ramp from 1 to 0 over ``width`` at each edge of the box."""
    if not 0 < width <= grid.box_length / 4:
        raise ConfigError(f"absorber width {width} must be in (0, box/4 = {grid.box_length / 4}]")
    z = grid.z
    edge = 0.5 * grid.box_length
    depth = np.clip((np.abs(z) - (edge - width)) / width, 0.0, 1.0)
    mask = np.cos(0.5 * np.pi * depth) ** 0.125
    mask[depth <= 0.0] = 1.0
    return mask


def apply_absorber(psi: Wavefunction, plan: PropagationPlan) -> Wavefunction:
    if not plan.absorber_enabled:
        raise ConfigError("absorber is disabled in this plan")
    return Wavefunction(psi.amplitudes * absorber_mask(psi.grid, plan.absorber_width), psi.grid)


def propagate(psi0: Wavefunction, pot: Potential, plan: PropagationPlan,
              basis: BoundBasis | None = None, keep_states: bool = False) -> Trajectory:
    """Propagate one state; snapshots every ``plan.sample_stride`` steps."""
    if psi0.grid != pot.grid:
        raise GridMismatchError("initial state and potential live on different grids")
    return propagate_batch(psi0.amplitudes[None, :], pot, plan, basis, keep_states)[0]


def propagate_batch(amplitudes: np.ndarray, pot: Potential, plan: PropagationPlan,
                    basis: BoundBasis | None = None, keep_states: bool = False) -> list[Trajectory]:
    """Propagate several states under the same fields.

    ``amplitudes`` has shape (n_states, n_points). With ``basis`` given the
    bound-state projections <m|psi(t)> are recorded at every sample.
    """
    grid = pot.grid
    psi = np.array(amplitudes, dtype=complex, ndmin=2)
    if psi.shape[1] != grid.n_points:
        raise ConfigError("initial states do not match the grid")
    nb = psi.shape[0]
    dz = grid.dz
    diag, off = h0_tridiagonal(pot)
    z = np.ascontiguousarray(grid.z)

    if not plan.absorber_enabled and any(abs(p.e_max) > STRONG_FIELD_WARNING for p in plan.fields):
        log.warning("peak field above %.2f a.u. with the absorber off; check for edge reflections",
                     STRONG_FIELD_WARNING)
    mask = absorber_mask(grid, plan.absorber_width) if plan.absorber_enabled else None

    n_steps = plan.n_steps
    mid_times = plan.t_start + plan.dt * (np.arange(n_steps) + 0.5)
    fields = total_field(plan.fields, mid_times)
    if not np.all(np.isfinite(fields)):
        raise StabilityError("non-finite field values in the propagation window")
    sample_steps = plan.sample_steps()
    n_samples = len(sample_steps)

    norms = np.empty((n_samples, nb))
    dipoles = np.empty((n_samples, nb))
    states = np.empty((n_samples, nb, grid.n_points), complex) if keep_states else None
    projections = np.empty((n_samples, nb, basis.n_states), complex) if basis is not None else None

    def record(j, u, t):
        dens = u.real ** 2 + u.imag ** 2
        norms[j] = dens.sum(axis=1) * dz
        if not np.all(np.isfinite(norms[j])):
            raise StabilityError(f"non-finite wavefunction at t = {t:.6g}")
        dipoles[j] = dens @ z * dz
        if keep_states:
            states[j] = u
        if basis is not None:
            projections[j] = u @ basis.vectors.T * dz

    out = np.empty_like(psi)
    cp = np.empty(grid.n_points, complex)
    inv_m = np.empty(grid.n_points, complex)
    record(0, psi, plan.t_start)
    j = 1
    for k in range(n_steps):
        cn_step(psi, out, diag, off, z, fields[k], plan.dt, cp, inv_m)
        psi, out = out, psi
        if mask is not None:
            psi *= mask
        if j < n_samples and k + 1 == sample_steps[j]:
            record(j, psi, plan.t_start + (k + 1) * plan.dt)
            j += 1

    if mask is None:
        drift = np.abs(norms - norms[0]).max()
        if drift > NORM_TOLERANCE:
            raise StabilityError(f"norm drift {drift:.3g} exceeds {NORM_TOLERANCE}")

    times = plan.t_start + plan.dt * sample_steps
    return [
        Trajectory(grid=grid, times=times, norms=norms[:, b], dipoles=dipoles[:, b],
                   final=psi[b].copy(),
                   states=None if states is None else states[:, b],
                   projections=None if projections is None else projections[:, b])
        for b in range(nb)
    ]


def ionization_probability(psi: Wavefunction, basis: BoundBasis) -> float:
    """1 - sum_n |<n|psi>|^2 over the basis, clipped to [0, 1]."""
    if psi.grid != basis.grid:
        raise GridMismatchError("state and basis live on different grids")
    pops = np.abs(basis.project(psi.amplitudes)) ** 2
    return float(np.clip(1.0 - pops.sum(), 0.0, 1.0))
