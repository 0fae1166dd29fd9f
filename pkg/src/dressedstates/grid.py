"""Uniform 1D grid, soft-core potential and the field-free Hamiltonian.

The kinetic energy uses the 3-point central difference with the wavefunction
taken to vanish outside the box, so H0 is a real symmetric tridiagonal
matrix. Grid points sit at half-integer multiples of ``dz`` (no point at
z = 0), which keeps the grid symmetric for an even number of points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import ConfigError, GridMismatchError


@dataclass(frozen=True)
class Grid:
    dz: float
    n_points: int
    z_min: float

    @cached_property
    def z(self) -> np.ndarray:
        z = self.z_min + self.dz * np.arange(self.n_points)
        z.flags.writeable = False
        return z

    @property
    def box_length(self) -> float:
        return self.n_points * self.dz


@dataclass(frozen=True, eq=False)
class Potential:
    grid: Grid
    soft_core_a: float
    values: np.ndarray = field(repr=False)


@dataclass(eq=False)
class Wavefunction:
    amplitudes: np.ndarray
    grid: Grid

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if self.amplitudes.shape != (self.grid.n_points,):
            raise GridMismatchError(
                f"amplitudes have shape {self.amplitudes.shape}, grid has {self.grid.n_points} points")

    def norm2(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real * self.grid.dz)

    def normalized(self) -> Wavefunction:
        return Wavefunction(self.amplitudes / np.sqrt(self.norm2()), self.grid)

    def __add__(self, other):
        _check_same_grid(self.grid, other.grid)
        return Wavefunction(self.amplitudes + other.amplitudes, self.grid)

    def __mul__(self, scalar):
        return Wavefunction(scalar * self.amplitudes, self.grid)

    __rmul__ = __mul__


def _check_same_grid(g1: Grid, g2: Grid):
    if g1 != g2:
        raise GridMismatchError(f"grid mismatch: {g1} vs {g2}")


def build_grid(dz: float, box_length: float) -> Grid:
    """Symmetric grid of ``box_length / dz`` points centred on z = 0."""
    if not dz > 0:
        raise ConfigError(f"grid.dz must be positive, got {dz}")
    if not box_length > 0:
        raise ConfigError(f"grid.box must be positive, got {box_length}")
    ratio = box_length / dz
    n = int(round(ratio))
    if abs(ratio - n) > 1e-9 * max(1.0, ratio):
        raise ConfigError(f"box length {box_length} is not an integer multiple of dz = {dz}")
    if n % 2:
        # half-integer registration needs an even count
        raise ConfigError(
            f"box length {box_length} / dz = {n} points; an even point count is required")
    z_min = -0.5 * (n - 1) * dz
    return Grid(dz=float(dz), n_points=n, z_min=z_min)


def soft_core_potential(grid: Grid, a: float) -> Potential:
    if not a > 0:
        raise ConfigError(f"potential.a must be positive, got {a}")
    values = -1.0 / np.sqrt(grid.z ** 2 + a * a)
    values.flags.writeable = False
    return Potential(grid=grid, soft_core_a=float(a), values=values)


def h0_tridiagonal(pot: Potential) -> tuple[np.ndarray, float]:
    """Diagonal and (constant) off-diagonal of the discrete H0."""
    dz = pot.grid.dz
    return 1.0 / dz ** 2 + pot.values, -0.5 / dz ** 2


def apply_h0(pot: Potential, psi: Wavefunction) -> Wavefunction:
    _check_same_grid(pot.grid, psi.grid)
    u = psi.amplitudes
    lap = -2.0 * u
    lap[1:] += u[:-1]
    lap[:-1] += u[1:]
    return Wavefunction(-0.5 * lap / pot.grid.dz ** 2 + pot.values * u, psi.grid)


def inner_product(a: Wavefunction, b: Wavefunction) -> complex:
    _check_same_grid(a.grid, b.grid)
    return complex(np.vdot(a.amplitudes, b.amplitudes) * a.grid.dz)


def dipole_expectation(a: Wavefunction, b: Wavefunction) -> complex:
    """<a|z|b> on the grid."""
    _check_same_grid(a.grid, b.grid)
    return complex(np.vdot(a.amplitudes, a.grid.z * b.amplitudes) * a.grid.dz)
