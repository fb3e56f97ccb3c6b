"""Unit conversions and parsing of unit-suffixed quantity strings.

All internal computation is in SI base units (W, W/Hz, Hz, s, J, bits);
dB-style units are accepted only at the configuration boundary.
"""

from __future__ import annotations

import math

__all__ = [
    "dbm_to_watts",
    "watts_to_dbm",
    "dbm_per_hz_to_watts_per_hz",
    "parse_quantity",
]


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    if watts <= 0.0:
        raise ValueError(f"cannot express {watts!r} W in dBm")
    return 10.0 * math.log10(watts) + 30.0


def dbm_per_hz_to_watts_per_hz(dbm_per_hz: float) -> float:
    return 10.0 ** ((dbm_per_hz - 30.0) / 10.0)


# unit suffix -> (kind, multiplicative factor or None for dB-style)
_UNIT_TABLE = {
    "w": ("power", 1.0),
    "mw": ("power", 1e-3),
    "kw": ("power", 1e3),
    "dbm": ("power", None),
    "w/hz": ("psd", 1.0),
    "dbm/hz": ("psd", None),
    "hz": ("frequency", 1.0),
    "khz": ("frequency", 1e3),
    "mhz": ("frequency", 1e6),
    "ghz": ("frequency", 1e9),
    "s": ("time", 1.0),
    "ms": ("time", 1e-3),
    "us": ("time", 1e-6),
    "j": ("energy", 1.0),
    "kj": ("energy", 1e3),
    "bit": ("bits", 1.0),
    "bits": ("bits", 1.0),
    "kbit": ("bits", 1e3),
    "mbit": ("bits", 1e6),
}


def parse_quantity(value, kind: str) -> float:
    """Parse a config value into SI base units.

    Bare numbers are taken as already being in base units for `kind`;
    strings must look like "<number> <unit>" (e.g. "20 dBm", "0.5 MHz",
    "-174 dBm/Hz", "2200 J").
    """
    if isinstance(value, bool):
        raise ValueError(f"expected a {kind} quantity, got boolean {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ValueError(f"expected number or unit string for {kind}, got {value!r}")

    text = value.strip()
    parts = text.split()
    if len(parts) == 2:
        num_part, unit_part = parts
    elif len(parts) == 1:
        # allow "20dBm" style with no space
        num_part = text.rstrip("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ/")
        unit_part = text[len(num_part):]
    else:
        raise ValueError(f"cannot parse quantity {value!r}")

    try:
        number = float(num_part)
    except ValueError as exc:
        raise ValueError(f"cannot parse number in quantity {value!r}") from exc

    unit = unit_part.strip().lower()
    if not unit:
        return number
    if unit not in _UNIT_TABLE:
        raise ValueError(f"unknown unit {unit_part!r} in quantity {value!r}")
    unit_kind, factor = _UNIT_TABLE[unit]
    if unit_kind != kind:
        raise ValueError(
            f"unit {unit_part!r} is a {unit_kind} unit but a {kind} was expected"
        )
    if factor is None:
        if unit == "dbm":
            return dbm_to_watts(number)
        return dbm_per_hz_to_watts_per_hz(number)
    return number * factor
