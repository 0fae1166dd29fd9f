"""Conversions between atomic units and reporting units."""

from .errors import ConfigError

HARTREE_EV = 27.2114
AU_TIME_PER_FS = 41.341
AU_FIELD_V_PER_M = 5.412e11

_FACTORS = {
    ("hartree", "ev"): HARTREE_EV,
    ("au_time", "fs"): 1.0 / AU_TIME_PER_FS,
    ("au_field", "v/m"): AU_FIELD_V_PER_M,
}


def convert_units(value, from_unit: str, to_unit: str):
    """Multiply by the conversion constant for a supported unit pair.

    Supported: hartree <-> eV, au_time <-> fs, au_field <-> V/m.
    """
    key = (from_unit.lower(), to_unit.lower())
    if key[0] == key[1]:
        return value
    if key in _FACTORS:
        return value * _FACTORS[key]
    if key[::-1] in _FACTORS:
        return value / _FACTORS[key[::-1]]
    raise ConfigError(f"unsupported unit conversion {from_unit} -> {to_unit}")


def au_to_fs(t):
    return t / AU_TIME_PER_FS
