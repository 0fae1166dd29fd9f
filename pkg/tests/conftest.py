import math

import numpy as np
import pytest

from dressedstates.config import Config
from dressedstates.dressed import unperturbed_family
from dressedstates.experiments import System
from dressedstates.grid import build_grid, soft_core_potential
from dressedstates.pulses import PulseParams, support
from dressedstates.spectrum import bound_states

TAIL = 250.0


class LaserData:
    """Laser-only runs and all four families on a window extended past the pulse."""

    def __init__(self, system, laser, tail=TAIL):
        self.laser = laser
        t0, t1 = system.window([laser])
        self.t_pulse_end = t1
        t1 = math.ceil((t1 + tail) / system.spacing - 1e-9) * system.spacing
        self.runs, self.fams = system.laser_families(laser, t0, t1)
        self.times = self.runs[0].times
        self.k_end = int(np.argmin(np.abs(self.times - self.t_pulse_end)))


@pytest.fixture(scope="session")
def default_system():
    return System.from_config(Config())


@pytest.fixture(scope="session")
def laser_data(default_system):
    cache = {}

    def get(e_max):
        if e_max not in cache:
            cache[e_max] = LaserData(default_system, PulseParams(e_max, 0.06, 126.78))
        return cache[e_max]

    return get


@pytest.fixture(scope="session")
def small_system():
    """A cheaper box for unit tests; bound states 0-2 are well converged in it."""
    grid = build_grid(0.1, 204.8)
    pot = soft_core_potential(grid, 0.3)
    return System(grid, pot, bound_states(pot, 3), dt=0.02, sample_stride=5)


@pytest.fixture(scope="session")
def short_laser():
    return PulseParams(0.03, 0.06, 20.0)


@pytest.fixture(scope="session")
def small_laser_data(small_system, short_laser):
    t0, t1 = small_system.window([short_laser])
    runs, fams = small_system.laser_families(short_laser, t0, t1)
    return runs, fams


def free_family(basis, times):
    """Laser-off family: identity coefficients, a_n(t) = exp(-i eps_n (t - t0))."""
    times = np.asarray(times, dtype=float)
    fam = unperturbed_family(basis, times)
    fam.amplitudes = np.exp(-1j * np.outer(times - times[0], basis.energies))
    return fam


def probe_times(probe, spacing=0.1, pad=1.0):
    lo, hi = support(probe)
    k0 = math.floor((lo - pad) / spacing)
    k1 = math.ceil((hi + pad) / spacing)
    return spacing * np.arange(k0, k1 + 1)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
