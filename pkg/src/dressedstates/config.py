"""Flat ``key = value`` run configuration with defaults for the model atom."""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigError
from .pulses import PulseParams


def _positive(x):
    return x > 0


def _nonnegative(x):
    return x >= 0


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _families(text):
    tags = tuple(t.strip() for t in str(text).replace(" ", ",").split(",") if t.strip())
    if not tags or any(t not in ("u", "a", "d", "p") for t in tags):
        raise ValueError(f"families must be a subset of u,a,d,p, got {text!r}")
    return tags


# key: (parser, default, range check or None, description of the valid range)
SCHEMA = {
    "grid.dz": (float, 0.1, _positive, "> 0"),
    "grid.box": (float, 819.2, _positive, "> 0"),
    "potential.a": (float, 0.3, _positive, "> 0"),
    "spectrum.n_states": (int, 5, _positive, ">= 1"),
    "laser.e_max": (float, 0.02, _nonnegative, ">= 0"),
    "laser.omega": (float, 0.06, _positive, "> 0"),
    "laser.T": (float, 126.78, _positive, "> 0"),
    "probe.e_max": (float, 1e-3, _nonnegative, ">= 0"),
    "probe.omega": (float, 1.34, _positive, "> 0"),
    "probe.T": (float, 10.84, _positive, "> 0"),
    "probe.tau": (float, 0.0, None, ""),
    "propagation.dt": (float, 0.02, _positive, "> 0"),
    "propagation.sample_stride": (int, 5, _positive, ">= 1"),
    "propagation.absorber": (_bool, False, None, ""),
    "propagation.absorber_width": (float, 40.0, _positive, "> 0"),
    "dressed.dynamic_dt": (float, 0.0025, _positive, "> 0"),
    "model.amp_floor": (float, 1e-3, _positive, "> 0"),
    "scan.i": (int, 1, _nonnegative, ">= 0"),
    "scan.f": (int, 0, _nonnegative, ">= 0"),
    "scan.tau_min": (float, -150.0, None, ""),
    "scan.tau_max": (float, 150.0, None, ""),
    "scan.tau_step": (float, 5.0, _positive, "> 0"),
    "scan.families": (_families, ("u", "a", "d", "p"), None, ""),
    "scan.tdse_reference": (_bool, True, None, ""),
    "scan.workers": (int, 1, _positive, ">= 1"),
}


@dataclass(frozen=True)
class Config:
    values: dict = field(default_factory=lambda: {k: v[1] for k, v in SCHEMA.items()})

    def __getitem__(self, key):
        return self.values[key]

    def replace(self, overrides: dict) -> Config:
        """New config with ``overrides`` (already typed or as strings) applied."""
        values = dict(self.values)
        for key, value in overrides.items():
            values[key] = _coerce(key, value)
        _check_cross(values)
        return Config(values)

    def laser(self) -> PulseParams:
        return PulseParams(self["laser.e_max"], self["laser.omega"], self["laser.T"], 0.0)

    def probe(self, tau: float | None = None) -> PulseParams:
        tau = self["probe.tau"] if tau is None else tau
        return PulseParams(self["probe.e_max"], self["probe.omega"], self["probe.T"], tau)

    def to_text(self) -> str:
        lines = []
        for key in SCHEMA:
            value = self.values[key]
            if isinstance(value, tuple):
                value = ",".join(value)
            elif isinstance(value, bool):
                value = str(value).lower()
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{key} = {value}")
        return "\n".join(lines) + "\n"


def _coerce(key, value):
    if key not in SCHEMA:
        raise ConfigError(f"unknown configuration key {key!r}")
    parse, _, check, valid = SCHEMA[key]
    try:
        typed = parse(value) if isinstance(value, str) or parse is not _families else _families(",".join(value))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot parse {value!r} ({exc})") from None
    if parse is int and isinstance(value, float) and value != int(value):
        raise ConfigError(f"{key}: expected an integer, got {value!r}")
    if check is not None and not check(typed):
        raise ConfigError(f"{key} = {typed!r} is out of range (must be {valid})")
    return typed


def _check_cross(values):
    if values["scan.tau_max"] < values["scan.tau_min"]:
        raise ConfigError("scan.tau_max must not be below scan.tau_min")
    n = values["spectrum.n_states"]
    for key in ("scan.i", "scan.f"):
        if values[key] >= n:
            raise ConfigError(f"{key} = {values[key]} exceeds the {n} bound states")


def parse_config(text: str) -> Config:
    """Parse ``key = value`` lines ('#' starts a comment) over the defaults."""
    overrides = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in overrides:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        overrides[key] = value
    return Config().replace(overrides)


def load_config(path) -> Config:
    with open(path) as fh:
        return parse_config(fh.read())
