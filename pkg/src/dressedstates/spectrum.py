"""Lowest bound eigenpairs of the discrete field-free Hamiltonian.

Eigenvalues come from Sturm-sequence bisection on the tridiagonal H0 and
eigenvectors from inverse iteration. Vectors are normalized on the grid
(sum |psi|^2 dz = 1) and signed so that the first significant component,
scanning from the left edge, is positive.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded

from ._kernels import sturm_count
from .errors import SpectrumError
from .grid import Grid, Potential, Wavefunction, h0_tridiagonal

SEED = 0x5EED
# components below this fraction of the peak are treated as zero for the sign rule
SIGN_THRESHOLD = 1e-8


@dataclass(frozen=True, eq=False)
class BoundBasis:
    grid: Grid
    energies: np.ndarray
    vectors: np.ndarray = field(repr=False)
    dipole: np.ndarray

    @property
    def n_states(self) -> int:
        return len(self.energies)

    @property
    def states(self) -> list[Wavefunction]:
        return [Wavefunction(v, self.grid) for v in self.vectors]

    def state(self, n: int) -> Wavefunction:
        return Wavefunction(self.vectors[n], self.grid)

    def project(self, amplitudes: np.ndarray) -> np.ndarray:
        """<m|psi> for every basis state; works on the last axis."""
        return np.tensordot(amplitudes, self.vectors, axes=([-1], [1])) * self.grid.dz


def bisect_eigenvalue(diag, off, index, lo, hi, max_iter=200):
    """Eigenvalue number ``index`` (ascending, from 0) inside [lo, hi]."""
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if hi - lo <= 2.0 * np.finfo(float).eps * max(abs(lo), abs(hi)):
            break
        if sturm_count(diag, off, mid) > index:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def inverse_iteration(diag, off, energy, dz, previous=(), rng=None, n_iter=3):
    n = len(diag)
    rng = np.random.default_rng(SEED) if rng is None else rng
    shift = energy - 1e-10 * max(1.0, abs(energy))
    ab = np.empty((3, n))
    ab[0, :] = off
    ab[1, :] = diag - shift
    ab[2, :] = off
    x = rng.standard_normal(n)
    for _ in range(n_iter):
        x = solve_banded((1, 1), ab, x, check_finite=False)
        for v in previous:
            x -= v * (v @ x) * dz
        x /= np.sqrt(x @ x * dz)
    return x


def _fix_sign(v):
    significant = np.flatnonzero(np.abs(v) > SIGN_THRESHOLD * np.abs(v).max())
    return -v if v[significant[0]] < 0 else v


def bound_states(pot: Potential, n_states: int = 5) -> BoundBasis:
    if n_states < 1:
        raise SpectrumError(f"n_states must be >= 1, got {n_states}")
    diag, off = h0_tridiagonal(pot)
    n_negative = sturm_count(diag, off, 0.0)
    if n_negative < n_states:
        raise SpectrumError(
            f"only {n_negative} negative eigenvalues, {n_states} bound states requested")

    lower = float(diag.min() - 2 * abs(off))
    energies = np.array([bisect_eigenvalue(diag, off, j, lower, 0.0) for j in range(n_states)])

    rng = np.random.default_rng(SEED)
    vectors = []
    for e in energies:
        v = inverse_iteration(diag, off, e, pot.grid.dz, previous=vectors, rng=rng)
        vectors.append(_fix_sign(v))
    vectors = np.array(vectors)
    return BoundBasis(grid=pot.grid, energies=energies, vectors=vectors,
                      dipole=_dipole(vectors, pot.grid))


def _dipole(vectors, grid):
    z = (vectors * grid.z) @ vectors.T * grid.dz
    return 0.5 * (z + z.T)


def dipole_matrix(basis: BoundBasis) -> np.ndarray:
    """Z0[m, n] = <m|z|n>, symmetrized."""
    return _dipole(basis.vectors, basis.grid)
