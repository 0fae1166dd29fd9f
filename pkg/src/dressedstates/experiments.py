"""Delay scans and figure datasets.

A scan fixes the laser, moves the probe center over a grid of delays and,
for every delay, compares the probe-model transition probability of each
dressed family with a full two-pulse TDSE run. Everything is normalized by
one probe-only TDSE probability. The laser-only propagations that the
families need are done once per scan and shared by all delays.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .config import Config
from .dressed import FAMILIES, DressedTrajectory, build_family, laser_runs
from .errors import ConfigError, DepletionSingularityError
from .grid import Grid, Potential, build_grid, soft_core_potential
from .probe import AMP_FLOOR, final_probability
from .propagator import PropagationPlan, Trajectory, aligned_window, propagate
from .pulses import PulseParams, electric_field, support
from .spectrum import BoundBasis, bound_states
from .units import au_to_fs

log = logging.getLogger(__name__)

FIG4_FIELDS = (0.02, 0.03, 0.04)
FIG4_TAIL = 250.0


@dataclass(frozen=True)
class System:
    """Grid, potential, bound basis and the numerical settings shared by all runs."""

    grid: Grid
    pot: Potential
    basis: BoundBasis
    dt: float = 0.02
    sample_stride: int = 5
    dynamic_dt: float = 0.0025
    amp_floor: float = AMP_FLOOR
    absorber: bool = False
    absorber_width: float = 40.0

    @classmethod
    def from_config(cls, cfg: Config) -> System:
        grid = build_grid(cfg["grid.dz"], cfg["grid.box"])
        pot = soft_core_potential(grid, cfg["potential.a"])
        basis = bound_states(pot, cfg["spectrum.n_states"])
        return cls(grid, pot, basis, dt=cfg["propagation.dt"],
                   sample_stride=cfg["propagation.sample_stride"],
                   dynamic_dt=cfg["dressed.dynamic_dt"], amp_floor=cfg["model.amp_floor"],
                   absorber=cfg["propagation.absorber"],
                   absorber_width=cfg["propagation.absorber_width"])

    @property
    def spacing(self) -> float:
        """Time between recorded samples."""
        return self.dt * self.sample_stride

    def window(self, pulses) -> tuple[float, float]:
        return aligned_window(pulses, self.spacing)

    def plan(self, fields, t_start: float, t_end: float, sample_stride: int | None = None) -> PropagationPlan:
        stride = self.sample_stride if sample_stride is None else sample_stride
        return PropagationPlan(dt=self.dt, t_start=t_start, t_end=t_end, fields=tuple(fields),
                               sample_stride=stride, absorber_enabled=self.absorber,
                               absorber_width=self.absorber_width)

    def final_population(self, i: int, f: int, fields, t_start: float, t_end: float) -> float:
        """|<f|psi(t_end)>|^2 for a full TDSE run from |i>; only the final state is kept."""
        n_steps = int(round((t_end - t_start) / self.dt))
        tr = propagate(self.basis.state(i), self.pot,
                       self.plan(fields, t_start, t_end, sample_stride=max(n_steps, 1)))
        return float(abs(self.basis.project(tr.final)[f]) ** 2)

    def laser_families(self, laser: PulseParams, t_start: float, t_end: float,
                       families=FAMILIES) -> tuple[list[Trajectory], dict[str, DressedTrajectory]]:
        runs = laser_runs(self.basis, self.pot, self.plan((laser,), t_start, t_end))
        fams = {tag: build_family(tag, self.basis, laser, runs, self.dynamic_dt) for tag in families}
        return runs, fams


@dataclass(frozen=True)
class ScanConfig:
    i: int
    f: int
    tau_grid: tuple
    laser: PulseParams
    probe: PulseParams
    families: tuple = FAMILIES
    tdse_reference: bool = True
    workers: int = 1

    def __post_init__(self):
        taus = np.asarray(self.tau_grid, dtype=float)
        object.__setattr__(self, "tau_grid", tuple(float(t) for t in taus))
        object.__setattr__(self, "families", tuple(self.families))
        if taus.size == 0:
            raise ConfigError("empty delay grid")
        if np.any(np.diff(taus) <= 0):
            raise ConfigError("delay grid must be strictly increasing")
        bad = [t for t in self.families if t not in FAMILIES]
        if bad:
            raise ConfigError(f"unknown families {bad}; expected a subset of {FAMILIES}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")

    @classmethod
    def from_config(cls, cfg: Config) -> ScanConfig:
        return cls(i=cfg["scan.i"], f=cfg["scan.f"],
                   tau_grid=tau_grid(cfg["scan.tau_min"], cfg["scan.tau_max"], cfg["scan.tau_step"]),
                   laser=cfg.laser(), probe=cfg.probe(0.0), families=cfg["scan.families"],
                   tdse_reference=cfg["scan.tdse_reference"], workers=cfg["scan.workers"])

    def probes(self) -> list[PulseParams]:
        return [self.probe.shifted(t) for t in self.tau_grid]


def tau_grid(tau_min: float, tau_max: float, step: float) -> np.ndarray:
    """tau_min, tau_min + step, ... up to tau_max inclusive (to rounding)."""
    if step <= 0:
        raise ConfigError("tau step must be positive")
    n = int(math.floor((tau_max - tau_min) / step + 1e-9))
    return tau_min + step * np.arange(n + 1)


@dataclass(eq=False)
class ScanResult:
    config: ScanConfig
    taus: np.ndarray
    t_final: np.ndarray
    p_model: dict
    p_tdse: np.ndarray | None
    p_nolaser: float
    flags: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    def ratio(self, tag: str) -> np.ndarray:
        """Normalized ratio for a family tag or for ``"tdse"``; NaN where absent."""
        if tag == "tdse":
            p = self.p_tdse if self.p_tdse is not None else np.full(len(self.taus), np.nan)
        elif tag in self.p_model:
            p = self.p_model[tag]
        else:
            p = np.full(len(self.taus), np.nan)
        return p / self.p_nolaser

    def mean_abs_error(self, tag: str) -> float:
        """Mean |ratio_tag - ratio_tdse| over the delays where both exist."""
        diff = np.abs(self.ratio(tag) - self.ratio("tdse"))
        return float(np.nanmean(diff)) if np.any(np.isfinite(diff)) else math.nan

    def rows(self):
        """(tau_au, tau_fs, ratio_u, ratio_a, ratio_d, ratio_p, ratio_tdse, flags) per delay."""
        cols = [self.ratio(tag) for tag in FAMILIES] + [self.ratio("tdse")]
        for k, tau in enumerate(self.taus):
            yield (float(tau), float(au_to_fs(tau)), *(float(c[k]) for c in cols), self.flags[k])


def final_time(laser: PulseParams, probe: PulseParams, spacing: float) -> float:
    """Latest pulse end plus 1 a.u., rounded up onto the sampling grid."""
    end = max(support(laser)[1], support(probe)[1]) + 1.0
    return math.ceil(end / spacing - 1e-9) * spacing


# Per-process state for the delay loop, set once by _init_worker.
_STATE: dict = {}


def _init_worker(system, cfg, families, t_start):
    _STATE.update(system=system, cfg=cfg, families=families, t_start=t_start)


def _delay_point(k: int):
    system, cfg = _STATE["system"], _STATE["cfg"]
    tau = cfg.tau_grid[k]
    probe = cfg.probe.shifted(tau)
    t_f = final_time(cfg.laser, probe, system.spacing)
    model, flags = {}, []
    for tag, fam in _STATE["families"].items():
        try:
            model[tag] = final_probability(cfg.i, cfg.f, fam, probe, t_f, amp_floor=system.amp_floor)
        except DepletionSingularityError as exc:
            model[tag] = math.nan
            flags.append(f"{tag}:depleted(n={exc.state},t={exc.time:.6g})")
    tdse = math.nan
    if cfg.tdse_reference:
        t0 = system.window([cfg.laser, probe])[0]
        tdse = system.final_population(cfg.i, cfg.f, (cfg.laser, probe), t0, t_f)
    return k, t_f, model, tdse, ";".join(flags)


def run_scan(cfg: ScanConfig, system: System) -> ScanResult:
    """Probe-model and TDSE probabilities over the delay grid of ``cfg``."""
    nb = system.basis.n_states
    if not (0 <= cfg.i < nb and 0 <= cfg.f < nb):
        raise ConfigError(f"states i={cfg.i}, f={cfg.f} must be below {nb}")
    timings = {}
    probes = cfg.probes()
    t_start, t_end = system.window([cfg.laser, *probes])

    t = time.perf_counter()
    _, fams = system.laser_families(cfg.laser, t_start, t_end, cfg.families)
    timings["laser_runs_and_families"] = time.perf_counter() - t

    t = time.perf_counter()
    p0, p1 = system.window([cfg.probe])
    p_nolaser = system.final_population(cfg.i, cfg.f, (cfg.probe,), p0, p1)
    timings["normalizer"] = time.perf_counter() - t
    if p_nolaser <= 0.0:
        raise ConfigError("probe-only transition probability is zero; cannot normalize")

    t = time.perf_counter()
    n = len(cfg.tau_grid)
    if cfg.workers > 1 and n > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers, initializer=_init_worker,
                                 initargs=(system, cfg, fams, t_start)) as pool:
            points = list(pool.map(_delay_point, range(n)))
    else:
        _init_worker(system, cfg, fams, t_start)
        points = []
        for k in range(n):
            points.append(_delay_point(k))
            log.info("tau = %g done", cfg.tau_grid[k])
        _STATE.clear()
    points.sort(key=lambda p: p[0])
    timings["delay_points"] = time.perf_counter() - t

    p_model = {tag: np.array([p[2][tag] for p in points]) for tag in cfg.families}
    p_tdse = np.array([p[3] for p in points]) if cfg.tdse_reference else None
    return ScanResult(config=cfg, taus=np.array(cfg.tau_grid), t_final=np.array([p[1] for p in points]),
                      p_model=p_model, p_tdse=p_tdse, p_nolaser=p_nolaser,
                      flags=[p[4] for p in points], timings=timings)


@dataclass(eq=False)
class FigureData:
    """Columns for one figure plus the curves to draw (x column, y columns)."""

    name: str
    columns: dict
    x: str
    curves: tuple
    x_label: str = ""
    y_label: str = ""
    timings: dict = field(default_factory=dict)


def figure1(system: System, laser: PulseParams, state: int = 1) -> FigureData:
    """|a_state(t)|^2 for every family, the TDSE bound population and |E_L(t)|."""
    t = time.perf_counter()
    t0, t1 = system.window([laser])
    runs, fams = system.laser_families(laser, t0, t1)
    times = runs[0].times
    cols = {"t_au": times, "t_fs": au_to_fs(times), "abs_field": np.abs(electric_field(laser, times))}
    for tag in FAMILIES:
        cols[f"a{state}_{tag}"] = np.abs(fams[tag].amplitudes[:, state]) ** 2
    cols["tdse"] = np.abs(runs[state].projections[:, state]) ** 2
    curves = tuple(f"a{state}_{tag}" for tag in FAMILIES) + ("tdse",)
    return FigureData("fig1", cols, "t_fs", curves, "t (fs)", f"|a_{state}(t)|^2",
                      {"laser_runs_and_families": time.perf_counter() - t})


def figure_scan(which: int, system: System, cfg: ScanConfig) -> tuple[FigureData, ScanResult]:
    """Figures 2 (1 -> 0) and 3 (0 -> 1): normalized ratios against delay."""
    res = run_scan(cfg, system)
    names = ("tau_au", "tau_fs", "ratio_u", "ratio_a", "ratio_d", "ratio_p", "ratio_tdse")
    rows = list(res.rows())
    cols = {name: np.array([r[j] for r in rows]) for j, name in enumerate(names)}
    cols["flags"] = [r[-1] for r in rows]
    curves = tuple(f"ratio_{tag}" for tag in cfg.families)
    if cfg.tdse_reference:
        curves += ("ratio_tdse",)
    return FigureData(f"fig{which}", cols, "tau_fs", curves, "tau (fs)",
                      f"p_{cfg.f}{cfg.i} / p_{cfg.f}{cfg.i}(no laser)", res.timings), res


def figure4(system: System, laser: PulseParams, fields=FIG4_FIELDS, tail: float = FIG4_TAIL) -> FigureData:
    """|Z_10(t)|^2 from the projected family for several laser peak fields.

    The window runs ``tail`` a.u. past the laser so the post-pulse quantum
    beats are visible.
    """
    t = time.perf_counter()
    t0, t1 = system.window([laser])
    t1 = math.ceil((t1 + tail) / system.spacing - 1e-9) * system.spacing
    cols, curves = {}, []
    for e in fields:
        lp = laser.scaled(e)
        _, fams = system.laser_families(lp, t0, t1, families=("p",))
        fam = fams["p"]
        if not cols:
            cols = {"t_au": fam.times, "t_fs": au_to_fs(fam.times),
                    "abs_field": np.abs(electric_field(laser, fam.times))}
        name = f"z10_abs2_e{e:g}"
        cols[name] = np.abs(fam.dipole[:, 1, 0]) ** 2
        curves.append(name)
    return FigureData("fig4", cols, "t_fs", tuple(curves), "t (fs)", "|Z_10(t)|^2",
                      {"laser_runs_and_families": time.perf_counter() - t})


def reproduce_figure(which: int, system: System, cfg: Config, e_max: float | None = None):
    """Dataset for figure 1-4; returns (FigureData, ScanResult or None)."""
    laser = cfg.laser() if e_max is None else cfg.laser().scaled(e_max)
    if which == 1:
        return figure1(system, laser), None
    if which in (2, 3):
        i, f = (1, 0) if which == 2 else (0, 1)
        scfg = ScanConfig.from_config(cfg)
        scfg = ScanConfig(i=i, f=f, tau_grid=scfg.tau_grid, laser=laser, probe=scfg.probe,
                          families=scfg.families, tdse_reference=scfg.tdse_reference,
                          workers=scfg.workers)
        return figure_scan(which, system, scfg)
    if which == 4:
        return figure4(system, laser), None
    raise ConfigError(f"unknown figure {which}; expected 1, 2, 3 or 4")


def beat_period(times, signal) -> float:
    """Dominant period of a detrended signal from the peak of its spectrum."""
    times = np.asarray(times, dtype=float)
    y = np.asarray(signal, dtype=float)
    if len(times) < 8:
        raise ConfigError("need at least 8 samples to estimate a period")
    coef = np.polyfit(times - times.mean(), y, 1)
    y = y - np.polyval(coef, times - times.mean())
    n_pad = 16 * len(y)
    spec = np.abs(np.fft.rfft(y * np.hanning(len(y)), n_pad))
    freqs = np.fft.rfftfreq(n_pad, times[1] - times[0])
    k = int(np.argmax(spec[1:])) + 1
    return float(1.0 / freqs[k])
