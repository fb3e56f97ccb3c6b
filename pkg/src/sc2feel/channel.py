"""Uplink channel model: large-scale gain and ergodic Rayleigh capacity.

The ergodic rate of a unit-mean Rayleigh-faded link has the closed form
C(p) = -(B0/ln 2) * e^z * Ei(-z) with z = B0*N0/(p*phi); a seeded Monte-Carlo
estimator of the same expectation is provided as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .numerics import expint_e1_scaled

__all__ = [
    "ChannelParams",
    "DeviceProfile",
    "large_scale_gain",
    "ergodic_capacity",
    "mc_capacity_oracle",
]

_LN2 = math.log(2.0)

# Urban macro path loss in dB at distance d km: 128.1 + 37.6*log10(d).
_PATHLOSS_INTERCEPT_DB = 128.1
_PATHLOSS_SLOPE_DB = 37.6


def large_scale_gain(dist_km: float, shadowing_db: float = 0.0) -> float:
    """Linear large-scale power gain from path loss plus shadow fading (dB)."""
    if not dist_km > 0.0:
        raise ValueError(f"distance must be positive, got {dist_km!r} km")
    loss_db = _PATHLOSS_INTERCEPT_DB + _PATHLOSS_SLOPE_DB * math.log10(dist_km) + shadowing_db
    return 10.0 ** (-loss_db / 10.0)


@dataclass(frozen=True)
class ChannelParams:
    """Per-subcarrier bandwidth (Hz) and noise power spectral density (W/Hz)."""

    B0: float
    N0: float

    def __post_init__(self):
        if not self.B0 > 0.0:
            raise ValueError(f"B0 must be positive, got {self.B0!r}")
        if not self.N0 > 0.0:
            raise ValueError(f"N0 must be positive, got {self.N0!r}")


@dataclass(frozen=True)
class DeviceProfile:
    """One edge device: geometry, derived channel gain, and power limits (W)."""

    id: int
    dist_km: float
    shadowing_db: float = 0.0
    p_c_max: float = 0.1   # peak communication transmit power
    p_s_min: float = 0.1   # sensing power floor for acceptable sample quality
    p_s_max: float = 1.0   # peak sensing transmit power
    phi: float = field(default=None)  # derived from dist/shadowing when omitted

    def __post_init__(self):
        if self.phi is None:
            object.__setattr__(self, "phi", large_scale_gain(self.dist_km, self.shadowing_db))
        if not self.phi > 0.0:
            raise ValueError(f"device {self.id}: phi must be positive, got {self.phi!r}")
        if not 0.0 < self.p_s_min <= self.p_s_max:
            raise ValueError(
                f"device {self.id}: requires 0 < p_s_min <= p_s_max, "
                f"got ({self.p_s_min!r}, {self.p_s_max!r})"
            )
        if not self.p_c_max > 0.0:
            raise ValueError(f"device {self.id}: p_c_max must be positive, got {self.p_c_max!r}")


def ergodic_capacity(p_c: float, dev: DeviceProfile, ch: ChannelParams) -> float:
    """Closed-form ergodic uplink rate in bit/s; 0 at zero power by continuity.

    Strictly increasing in p_c and numerically stable at any SNR because the
    e^z * E1(z) product is evaluated in scaled form.
    """
    if p_c < 0.0:
        raise ValueError(f"transmit power must be non-negative, got {p_c!r}")
    if p_c == 0.0:
        return 0.0
    z = ch.B0 * ch.N0 / (p_c * dev.phi)
    return ch.B0 / _LN2 * expint_e1_scaled(z)


def mc_capacity_oracle(
    p_c: float,
    dev: DeviceProfile,
    ch: ChannelParams,
    n_draws: int,
    seed: int,
) -> float:
    """Monte-Carlo mean of the instantaneous rate over unit-mean exponential
    channel-power draws; deterministic given the seed."""
    if n_draws < 1:
        raise ValueError(f"n_draws must be >= 1, got {n_draws!r}")
    if p_c < 0.0:
        raise ValueError(f"transmit power must be non-negative, got {p_c!r}")
    rng = np.random.default_rng(seed)
    gains = rng.exponential(1.0, size=n_draws)
    snr = p_c * dev.phi / (ch.B0 * ch.N0)
    return float(ch.B0 * np.mean(np.log1p(snr * gains)) / _LN2)
