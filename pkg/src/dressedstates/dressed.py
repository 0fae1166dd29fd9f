"""Dressed bound states expanded in the field-free bound basis.

A family is stored as a time series of coefficient matrices C(t) whose
column n holds <m|phi_n(t)>. Four families are built:

    u  unperturbed states, C = 1
    a  adiabatic states, eigenvectors of diag(eps) + E_L(t) Z0
    d  dynamically dressed states, the TDSE solved inside the bound subspace
    p  projected dynamical states, full-TDSE solutions projected onto the
       bound subspace and Gram-Schmidt orthonormalized in ascending n

Depletion amplitudes a_n(t) = <phi_n(t)|U_L(t, t0)|n> need the laser-only
full propagations from every |n>, see ``laser_runs``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (ConfigError, ContinuityError, DegeneracyError,
                     IntegrationAccuracyError)
from .grid import Potential
from .propagator import PropagationPlan, Trajectory, propagate_batch
from .pulses import PulseParams, electric_field
from .spectrum import BoundBasis

FAMILIES = ("u", "a", "d", "p")
AMBIGUITY_TOLERANCE = 1e-6
ORTHONORMALITY_DRIFT = 1e-8
DEGENERACY_NORM = 1e-6
DYNAMIC_DT = 0.0025


@dataclass(eq=False)
class DressedTrajectory:
    family: str
    times: np.ndarray
    coeffs: np.ndarray
    amplitudes: np.ndarray | None = None
    energies: np.ndarray | None = None
    dipole: np.ndarray | None = None

    @property
    def n_states(self) -> int:
        return self.coeffs.shape[-1]

    def orthonormality_error(self) -> float:
        """max over samples of |C^H C - 1|."""
        return _orthonormality_error(self.coeffs)

    def index_of(self, t: float) -> int:
        k = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[k] - t) > 1e-6:
            raise ValueError(f"t = {t} is not a sampled instant")
        return k


def _orthonormality_error(c):
    eye = np.eye(c.shape[-1])
    return float(np.abs(np.einsum("tmi,tmj->tij", c.conj(), c) - eye).max())


def laser_runs(basis: BoundBasis, pot: Potential, plan: PropagationPlan) -> list[Trajectory]:
    """Laser-only propagations from every basis state, with recorded projections."""
    return propagate_batch(basis.vectors, pot, plan, basis=basis)


def projection_matrix(runs) -> np.ndarray:
    """P[t, m, n] = <m|U_L(t, t0)|n> from the runs started in |n>."""
    return np.stack([r.projections for r in runs], axis=-1)


def _times_from_runs(runs):
    times = runs[0].times
    for r in runs[1:]:
        if r.times.shape != times.shape or not np.allclose(r.times, times, rtol=0, atol=1e-9):
            raise ConfigError("laser runs are sampled on different instants")
    return times


def unperturbed_family(basis: BoundBasis, times) -> DressedTrajectory:
    times = np.asarray(times, dtype=float)
    coeffs = np.broadcast_to(np.eye(basis.n_states, dtype=complex),
                             (len(times), basis.n_states, basis.n_states)).copy()
    return DressedTrajectory("u", times, coeffs, dipole=dressed_dipole_matrices(coeffs, basis))


def subspace_hamiltonians(basis: BoundBasis, fields) -> np.ndarray:
    """diag(eps) + E z0 for every field value."""
    fields = np.asarray(fields, dtype=float)
    return np.diag(basis.energies) + fields[..., None, None] * basis.dipole


def adiabatic_family(basis: BoundBasis, laser: PulseParams, times) -> DressedTrajectory:
    """Instantaneous eigenvectors of the bound-subspace Hamiltonian.

    States are followed from one sample to the next by maximum overlap, not
    by energy order, and signed so that the overlap with the previous
    sample is positive.
    """
    times = np.asarray(times, dtype=float)
    energies, vectors = np.linalg.eigh(subspace_hamiltonians(basis, electric_field(laser, times)))
    nb = basis.n_states

    first = vectors[0] * np.where(np.diag(vectors[0]) < 0, -1.0, 1.0)
    out_vec = np.empty_like(vectors)
    out_e = np.empty_like(energies)
    out_vec[0] = first
    out_e[0] = energies[0]
    prev = first
    for k in range(1, len(times)):
        overlap = prev.T @ vectors[k]
        mag = np.abs(overlap)
        order = np.argsort(mag, axis=1)
        perm = order[:, -1]
        gap = mag[np.arange(nb), order[:, -1]] - mag[np.arange(nb), order[:, -2]]
        if np.any(gap < AMBIGUITY_TOLERANCE) or len(set(perm)) != nb:
            raise ContinuityError(
                f"ambiguous adiabatic state matching at t = {times[k]:.6g}; overlaps\n{mag}")
        signs = np.sign(overlap[np.arange(nb), perm])
        cur = vectors[k][:, perm] * signs
        out_vec[k] = cur
        out_e[k] = energies[k][perm]
        prev = cur

    coeffs = out_vec.astype(complex)
    return DressedTrajectory("a", times, coeffs, energies=out_e,
                             dipole=dressed_dipole_matrices(coeffs, basis))


def dynamic_family(basis: BoundBasis, laser: PulseParams, times, dt: float = DYNAMIC_DT) -> DressedTrajectory:
    """Bound-subspace TDSE i dC/dt = H_sub(t) C, C(t0) = 1, by classical RK4.

    ``times`` must be uniform with a spacing that is a whole multiple of dt.
    Unitarity is checked, not imposed.
    """
    times = np.asarray(times, dtype=float)
    spacing = np.diff(times)
    if len(times) > 1:
        if not np.allclose(spacing, spacing[0], rtol=0, atol=1e-9):
            raise ConfigError("dynamic family needs uniformly spaced samples")
        ratio = spacing[0] / dt
        substeps = int(round(ratio))
        if substeps < 1 or abs(ratio - substeps) > 1e-9 * ratio:
            raise ConfigError(f"dt = {dt} does not divide the sampling interval {spacing[0]}")
    else:
        substeps = 1
    n_steps = (len(times) - 1) * substeps
    h = spacing[0] / substeps if len(times) > 1 else dt

    eps = basis.energies[:, None]
    z0 = basis.dipole
    fields = electric_field(laser, times[0] + 0.5 * h * np.arange(2 * n_steps + 1))

    def rhs(e, c):
        return -1j * (eps * c + e * (z0 @ c))

    nb = basis.n_states
    c = np.eye(nb, dtype=complex)
    coeffs = np.empty((len(times), nb, nb), complex)
    coeffs[0] = c
    for s in range(n_steps):
        e0, e1, e2 = fields[2 * s], fields[2 * s + 1], fields[2 * s + 2]
        k1 = rhs(e0, c)
        k2 = rhs(e1, c + 0.5 * h * k1)
        k3 = rhs(e1, c + 0.5 * h * k2)
        k4 = rhs(e2, c + h * k3)
        c = c + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (s + 1) % substeps == 0:
            coeffs[(s + 1) // substeps] = c

    drift = _orthonormality_error(coeffs)
    if drift > ORTHONORMALITY_DRIFT:
        raise IntegrationAccuracyError(
            f"dynamic family lost orthonormality by {drift:.3g}; reduce dt (now {dt})")
    return DressedTrajectory("d", times, coeffs, dipole=dressed_dipole_matrices(coeffs, basis))


def gram_schmidt(columns: np.ndarray) -> np.ndarray:
    """Orthonormalize columns in ascending order for every sample.

    Column 0 is only normalized; column n is made orthogonal to the already
    processed columns 0..n-1 and then normalized.
    """
    q = np.array(columns, dtype=complex)
    nb = q.shape[-1]
    for n in range(nb):
        v = q[..., n]
        for l in range(n):
            u = q[..., l]
            v = v - u * np.sum(u.conj() * v, axis=-1, keepdims=True)
        norm = np.sqrt(np.sum(np.abs(v) ** 2, axis=-1))
        if np.any(norm < DEGENERACY_NORM):
            k = int(np.argmin(norm))
            raise DegeneracyError(
                f"projected state {n} has norm {norm[k]:.3g} after orthogonalization "
                f"(sample {k}); it is depleted or parallel to lower states")
        q[..., n] = v / norm[..., None]
    return q


def projected_family(basis: BoundBasis, laser: PulseParams | None = None, pot: Potential | None = None,
                     plan: PropagationPlan | None = None, runs=None) -> DressedTrajectory:
    """Projected dynamical states. Pass ``runs`` to reuse laser-only propagations."""
    if runs is None:
        if pot is None or plan is None:
            raise ConfigError("projected family needs either runs or (pot, plan)")
        if laser is not None and tuple(plan.fields) != (laser,):
            raise ConfigError("projected family plan must carry exactly the laser field")
        runs = laser_runs(basis, pot, plan)
    times = _times_from_runs(runs)
    coeffs = gram_schmidt(projection_matrix(runs))
    return DressedTrajectory("p", times, coeffs, dipole=dressed_dipole_matrices(coeffs, basis))


def depletion_amplitudes(family: DressedTrajectory, full_runs, basis: BoundBasis) -> np.ndarray:
    """a_n(t) = <phi_n(t)|psi_L^(n)(t)>, shape (n_times, n_states)."""
    if len(full_runs) != basis.n_states:
        raise ConfigError(f"need {basis.n_states} laser runs, got {len(full_runs)}")
    times = _times_from_runs(full_runs)
    if times.shape != family.times.shape or not np.allclose(times, family.times, rtol=0, atol=1e-9):
        raise ConfigError("dressed family and laser runs are sampled on different instants")
    p = projection_matrix(full_runs)
    return np.einsum("tmn,tmn->tn", family.coeffs.conj(), p)


def dressed_dipole_matrices(coeffs: np.ndarray, basis: BoundBasis) -> np.ndarray:
    return np.einsum("tmi,mk,tkn->tin", coeffs.conj(), basis.dipole, coeffs, optimize=True)


def dressed_dipole(family: DressedTrajectory, basis: BoundBasis) -> np.ndarray:
    """Z(t) = C(t)^H Z0 C(t) at every sample."""
    return dressed_dipole_matrices(family.coeffs, basis)


def build_family(tag: str, basis: BoundBasis, laser: PulseParams, runs,
                 dynamic_dt: float = DYNAMIC_DT) -> DressedTrajectory:
    """Family ``tag`` on the sampling of ``runs``, with depletion amplitudes filled in."""
    times = _times_from_runs(runs)
    if tag == "u":
        fam = unperturbed_family(basis, times)
    elif tag == "a":
        fam = adiabatic_family(basis, laser, times)
    elif tag == "d":
        fam = dynamic_family(basis, laser, times, dynamic_dt)
    elif tag == "p":
        fam = projected_family(basis, runs=runs)
    else:
        raise ConfigError(f"unknown dressed family {tag!r}; expected one of {FAMILIES}")
    fam.amplitudes = depletion_amplitudes(fam, runs, basis)
    return fam
