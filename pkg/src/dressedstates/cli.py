"""Command-line entry point: ``dressedstates <command> [options]``.

Every command resolves a configuration (defaults, then ``--config FILE``,
then ``--set key=value`` pairs, then the command's own flags), writes its
outputs and a ``manifest.json`` into ``--out``, and exits with 0 on
success, 2 on configuration errors, 3 on numerical failures and 4 on a
fatal depletion singularity.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .config import Config, parse_config
from .dressed import FAMILIES, build_family, laser_runs
from .errors import ConfigError, DressedStatesError
from .experiments import ScanConfig, System, final_time, reproduce_figure, run_scan
from .output import write_columns, write_csv, write_manifest, write_svg
from .probe import dipole_response, final_probability, transition_amplitudes
from .propagator import propagate
from .units import HARTREE_EV, au_to_fs, convert_units


class _Run:
    """Output directory, resolved config and stage timer for one command."""

    def __init__(self, args, cfg: Config):
        self.args = args
        self.cfg = cfg
        self.out = args.out
        os.makedirs(self.out, exist_ok=True)
        self.stages = {}
        self._t0 = time.perf_counter()

    def path(self, name):
        return os.path.join(self.out, name)

    def stage(self, name, func, *a, **kw):
        t = time.perf_counter()
        result = func(*a, **kw)
        self.stages[name] = self.stages.get(name, 0.0) + time.perf_counter() - t
        return result

    def finish(self):
        write_manifest(self.out, self.cfg.to_text(), sys.argv[1:] if self.args.argv is None else self.args.argv,
                       time.perf_counter() - self._t0, self.stages)


def _read_config(path):
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json"):
        try:
            text = json.loads(text)["config"]
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"{path}: not a run manifest ({exc})") from None
    return parse_config(text)


def _resolve(args) -> Config:
    cfg = _read_config(args.config) if args.config else Config()
    overrides = {}
    for item in args.set or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        overrides[key] = value
    for dest, key in _FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            overrides[key] = value
    if getattr(args, "no_tdse_ref", False):
        overrides["scan.tdse_reference"] = False
    return cfg.replace(overrides)


# argparse dest -> config key; only flags a command defines are consulted.
_FLAG_KEYS = {
    "e_max": "laser.e_max",
    "probe_e_max": "probe.e_max",
    "tau": "probe.tau",
    "dt": "propagation.dt",
    "stride": "propagation.sample_stride",
    "absorber": "propagation.absorber",
    "i": "scan.i",
    "f": "scan.f",
    "tau_min": "scan.tau_min",
    "tau_max": "scan.tau_max",
    "tau_step": "scan.tau_step",
    "families": "scan.families",
    "workers": "scan.workers",
}


def _state_pops(projections):
    return np.abs(projections) ** 2


def cmd_bound(run: _Run):
    system = run.stage("spectrum", System.from_config, run.cfg)
    eps = system.basis.energies
    print(f"{'n':>3} {'energy (hartree)':>18} {'energy (eV)':>14}")
    for n, e in enumerate(eps):
        print(f"{n:>3} {e:>18.10f} {convert_units(e, 'hartree', 'ev'):>14.6f}")
    write_csv(run.path("bound_states.csv"), ["n", "energy_au", "energy_ev"],
              [(n, e, e * HARTREE_EV) for n, e in enumerate(eps)])


def _fields(cfg, which):
    fields = {"none": (), "laser": (cfg.laser(),), "probe": (cfg.probe(),),
              "both": (cfg.laser(), cfg.probe())}
    return fields[which]


def cmd_propagate(run: _Run):
    args, cfg = run.args, run.cfg
    system = run.stage("spectrum", System.from_config, cfg)
    if not 0 <= args.initial < system.basis.n_states:
        raise ConfigError(f"--initial {args.initial} is not one of the {system.basis.n_states} bound states")
    fields = _fields(cfg, args.fields)
    if fields:
        t0, t1 = system.window(fields)
    else:
        t0, t1 = 0.0, args.duration
    if args.t_end is not None:
        t1 = max(t1, math.ceil(args.t_end / system.spacing - 1e-9) * system.spacing)
    plan = system.plan(fields, t0, t1)
    tr = run.stage("propagation", propagate, system.basis.state(args.initial), system.pot, plan,
                   system.basis)
    pops = _state_pops(tr.projections)
    ionized = np.clip(tr.norms - pops.sum(axis=1), 0.0, 1.0)
    header = ["t_au", "t_fs"] + [f"pop_{n}" for n in range(pops.shape[1])] + ["ionized", "norm"]
    rows = (
        (t, au_to_fs(t), *p, ion, nrm)
        for t, p, ion, nrm in zip(tr.times, pops, ionized, tr.norms)
    )
    write_csv(run.path("populations.csv"), header, rows)
    print(json.dumps({"t_final": float(tr.times[-1]), "populations": pops[-1].tolist(),
                      "ionized": float(ionized[-1]), "norm": float(tr.norms[-1])}, indent=2))


def _laser_family(run: _Run, system: System, tag, extra_pulses=(), tail=0.0):
    cfg = run.cfg
    laser = cfg.laser()
    t0, t1 = system.window([laser, *extra_pulses])
    if tail:
        t1 = math.ceil((t1 + tail) / system.spacing - 1e-9) * system.spacing
    runs = run.stage("laser_runs", laser_runs, system.basis, system.pot, system.plan((laser,), t0, t1))
    fam = run.stage(f"family_{tag}", build_family, tag, system.basis, laser, runs, system.dynamic_dt)
    return runs, fam


def cmd_dressed(run: _Run):
    args = run.args
    system = run.stage("spectrum", System.from_config, run.cfg)
    if not 0 <= args.initial < system.basis.n_states:
        raise ConfigError(f"--initial {args.initial} is not one of the {system.basis.n_states} bound states")
    runs, fam = _laser_family(run, system, args.family)
    t = fam.times
    surv = np.abs(fam.amplitudes) ** 2
    header = ["t_au", "t_fs"] + [f"abs2_a_{n}" for n in range(surv.shape[1])]
    write_csv(run.path("amplitudes.csv"), header, ((ti, au_to_fs(ti), *row) for ti, row in zip(t, surv)))
    z10 = fam.dipole[:, 1, 0]
    write_csv(run.path("z10.csv"), ["t_au", "t_fs", "re", "im", "abs2"],
              ((ti, au_to_fs(ti), z.real, z.imag, abs(z) ** 2) for ti, z in zip(t, z10)))
    n = args.initial
    print(json.dumps({"family": args.family, "state": n,
                      "min_abs2_a": float(surv[:, n].min()), "final_abs2_a": float(surv[-1, n]),
                      "final_tdse_population": float(abs(runs[n].projections[-1, n]) ** 2),
                      "orthonormality_error": fam.orthonormality_error()}, indent=2))


def _complex_json(z):
    return {"re": float(z.real), "im": float(z.imag), "abs2": float(abs(z) ** 2)}


def cmd_transition(run: _Run):
    args, cfg = run.args, run.cfg
    system = run.stage("spectrum", System.from_config, cfg)
    i, f = cfg["scan.i"], cfg["scan.f"]
    probe = cfg.probe()
    _, fam = _laser_family(run, system, args.family, extra_pulses=(probe,))
    t_f = final_time(cfg.laser(), probe, system.spacing)
    n_max = max(i, f)
    p = final_probability(i, f, fam, probe, t_f, amp_floor=system.amp_floor)
    amps = transition_amplitudes(i, fam, probe, t_f, n_max, system.amp_floor)
    doc = {"family": args.family, "i": i, "f": f, "tau": probe.t_center, "t_f": t_f,
           "p_fi": p, "restricted_sum_n_max": n_max,
           "alpha": {str(n): _complex_json(a) for n, a in enumerate(amps.alpha)}}
    try:
        doc["p_fi_full_sum"] = final_probability(i, f, fam, probe, t_f, restricted=False,
                                                 amp_floor=system.amp_floor)
    except DressedStatesError as exc:
        doc["p_fi_full_sum"] = None
        doc["full_sum_error"] = str(exc)
    print(json.dumps(doc, indent=2))
    with open(run.path("transition.json"), "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def cmd_dipole_response(run: _Run):
    args, cfg = run.args, run.cfg
    system = run.stage("spectrum", System.from_config, cfg)
    i = cfg["scan.i"]
    probe = cfg.probe()
    _, fam = _laser_family(run, system, args.family, extra_pulses=(probe,), tail=args.tail)
    t = fam.times
    for cross, name in ((False, "dipole.csv"), (True, "dipole_cross.csv")):
        d = run.stage("dipole_response", dipole_response, i, fam, probe, cross_only=cross,
                      amp_floor=system.amp_floor)
        write_csv(run.path(name), ["t_au", "t_fs", "d"], ((ti, au_to_fs(ti), di) for ti, di in zip(t, d)))
    print(f"wrote {run.path('dipole.csv')} (full sum) and {run.path('dipole_cross.csv')} (cross terms only)")


def _write_scan(run: _Run, res, stem="scan"):
    header = ["tau_au", "tau_fs"] + [f"ratio_{t}" for t in FAMILIES] + ["ratio_tdse", "flags"]
    write_csv(run.path(f"{stem}.csv"), header, res.rows())
    curves = {f"ratio_{t}": res.ratio(t) for t in res.config.families}
    if res.p_tdse is not None:
        curves["ratio_tdse"] = res.ratio("tdse")
    cfg = res.config
    write_svg(run.path(f"{stem}.svg"), au_to_fs(res.taus), curves, "tau (fs)",
              f"p_{cfg.f}{cfg.i} / no-laser value", f"{cfg.i} -> {cfg.f}, E_max = {cfg.laser.e_max:g}")
    summary = {"p_nolaser": res.p_nolaser,
               "mean_abs_error": {t: res.mean_abs_error(t) for t in cfg.families},
               "flagged_delays": sum(1 for fl in res.flags if fl)}
    print(json.dumps(summary, indent=2))


def cmd_scan(run: _Run):
    system = run.stage("spectrum", System.from_config, run.cfg)
    res = run_scan(ScanConfig.from_config(run.cfg), system)
    run.stages.update(res.timings)
    _write_scan(run, res)


def cmd_reproduce(run: _Run):
    which = int(run.args.figure[-1])
    system = run.stage("spectrum", System.from_config, run.cfg)
    data, res = reproduce_figure(which, system, run.cfg)
    run.stages.update(data.timings)
    write_columns(run.path(f"{data.name}.csv"), data.columns)
    write_svg(run.path(f"{data.name}.svg"), data.columns[data.x],
              {c: data.columns[c] for c in data.curves}, data.x_label, data.y_label, data.name)
    if res is not None:
        print(json.dumps({"p_nolaser": res.p_nolaser,
                          "mean_abs_error": {t: res.mean_abs_error(t) for t in res.config.families}},
                         indent=2))
    print(f"wrote {run.path(data.name + '.csv')}")


def _common(p):
    p.add_argument("--config", help="key = value file, or a manifest.json from an earlier run")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    p.add_argument("--out", default=".", help="output directory (default: current)")
    p.add_argument("-v", "--verbose", action="store_true")


def _scan_flags(p):
    p.add_argument("--i", type=int)
    p.add_argument("--f", type=int)
    p.add_argument("--e-max", type=float, help="laser peak field (a.u.)")
    p.add_argument("--tau-min", type=float)
    p.add_argument("--tau-max", type=float)
    p.add_argument("--tau-step", type=float)
    p.add_argument("--families", help="comma-separated subset of u,a,d,p")
    p.add_argument("--no-tdse-ref", action="store_true", help="skip the two-pulse TDSE references")
    p.add_argument("--workers", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dressedstates", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bound", help="field-free bound states")
    _common(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("propagate", help="full TDSE run from a bound state")
    _common(p)
    p.add_argument("--initial", type=int, default=1)
    p.add_argument("--fields", choices=("none", "laser", "probe", "both"), default="laser")
    p.add_argument("--e-max", type=float, help="laser peak field (a.u.)")
    p.add_argument("--probe-e-max", type=float)
    p.add_argument("--tau", type=float, help="probe center (a.u.)")
    p.add_argument("--dt", type=float)
    p.add_argument("--stride", type=int, help="record every N steps")
    p.add_argument("--absorber", choices=("true", "false"))
    p.add_argument("--t-end", type=float, help="propagate at least until this time")
    p.add_argument("--duration", type=float, default=100.0, help="window length with --fields none")
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("dressed", help="dressed-state family and depletion amplitudes")
    _common(p)
    p.add_argument("--family", choices=FAMILIES, default="p")
    p.add_argument("--e-max", type=float)
    p.add_argument("--initial", type=int, default=1, help="state summarized on stdout")
    p.set_defaults(func=cmd_dressed)

    for name, func, text in (("transition", cmd_transition, "probe transition probability p_fi"),
                             ("dipole-response", cmd_dipole_response, "probe-induced dipole d(t)")):
        p = sub.add_parser(name, help=text)
        _common(p)
        p.add_argument("--family", choices=FAMILIES, default="p")
        p.add_argument("--i", type=int)
        if name == "transition":
            p.add_argument("--f", type=int)
        else:
            p.add_argument("--tail", type=float, default=200.0, help="a.u. recorded after the pulses")
        p.add_argument("--e-max", type=float)
        p.add_argument("--probe-e-max", type=float)
        p.add_argument("--tau", type=float)
        p.set_defaults(func=func)

    p = sub.add_parser("scan", help="probe-delay scan against TDSE references")
    _common(p)
    _scan_flags(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("reproduce", help="figure datasets (CSV + SVG)")
    p.add_argument("figure", choices=("fig1", "fig2", "fig3", "fig4"))
    _common(p)
    _scan_flags(p)
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = argv
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve(args)
        run = _Run(args, cfg)
        args.func(run)
        run.finish()
    except DressedStatesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
