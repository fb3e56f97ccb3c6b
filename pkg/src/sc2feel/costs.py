"""Per-round latency/energy accounting and the C1-C5 constraint audit."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

from .channel import ChannelParams, DeviceProfile, ergodic_capacity

if TYPE_CHECKING:
    from .allocator import AllocationSolution
    from .scheduling import BatchSchedule

__all__ = [
    "SystemParams",
    "RoundCosts",
    "ConstraintCheck",
    "ConstraintReport",
    "sensing_time",
    "compute_time",
    "round_latency",
    "round_energy",
    "audit_constraints",
]

# Absolute comparison tolerances for pure floating-point arithmetic chains.
TIME_ENERGY_TOL = 1e-9  # seconds / joules
BITS_TOL = 1e-6         # bits (C1)
POWER_TOL = 1e-12       # watts


@dataclass(frozen=True)
class SystemParams:
    """Global constants of the deployment (SI units)."""

    K: int            # device count
    B0: float         # subcarrier bandwidth, Hz
    N0: float         # noise PSD, W/Hz
    D_b: float        # model upload size, bits
    T0: float         # unit sensing time per sample, s
    nu: float         # CPU cycles per sample
    tau: int          # local SGD steps per round
    f_cpu: float      # CPU frequency, cycles/s
    theta: float      # effective switched capacitance
    R: int            # total communication rounds
    T_max: float      # total latency budget, s
    E_max: float      # per-device energy budget, J

    def __post_init__(self):
        positive = {
            "B0": self.B0, "N0": self.N0, "D_b": self.D_b, "T0": self.T0,
            "nu": self.nu, "tau": self.tau, "f_cpu": self.f_cpu,
            "theta": self.theta, "T_max": self.T_max, "E_max": self.E_max,
        }
        for name, val in positive.items():
            if not val > 0.0:
                raise ValueError(f"{name} must be strictly positive, got {val!r}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K!r}")
        if self.R < 1:
            raise ValueError(f"R must be >= 1, got {self.R!r}")

    @property
    def channel(self) -> ChannelParams:
        return ChannelParams(self.B0, self.N0)

    @property
    def time_per_sample(self) -> float:
        # seconds of sensing + local computation per sensed sample
        return self.T0 + self.nu * self.tau / self.f_cpu

    @property
    def compute_energy_per_sample(self) -> float:
        return self.tau * self.theta * self.nu * self.f_cpu ** 2


@dataclass(frozen=True)
class RoundCosts:
    """Latency and energy components of one device in one round."""

    t_sense: float
    t_compute: float
    t_upload: float
    e_sense: float
    e_compute: float
    e_upload: float

    def __post_init__(self):
        for name in ("t_sense", "t_compute", "t_upload", "e_sense", "e_compute", "e_upload"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def energy_total(self) -> float:
        return self.e_sense + self.e_compute + self.e_upload


def _check_batch(b: int) -> int:
    if b != int(b) or b < 0:
        raise ValueError(f"batch size must be a non-negative integer, got {b!r}")
    return int(b)


def sensing_time(b: int, sys: SystemParams) -> float:
    """Seconds spent sensing a batch of b samples."""
    return sys.T0 * _check_batch(b)


def compute_time(b: int, sys: SystemParams) -> float:
    """Seconds of local computation for a batch of b samples."""
    return _check_batch(b) * sys.nu * sys.tau / sys.f_cpu


def round_latency(b: int, t_upload_per_device: list[float], sys: SystemParams) -> float:
    """One-round latency under synchronous aggregation.

    Sensing and computation times are common across devices (shared batch and
    CPU model), so only the upload time varies: the round ends when the
    slowest device finishes uploading.
    """
    if len(t_upload_per_device) != sys.K:
        raise ValueError(
            f"expected {sys.K} upload times, got {len(t_upload_per_device)}"
        )
    return sensing_time(b, sys) + compute_time(b, sys) + max(t_upload_per_device)


def round_energy(b: int, p_s: float, p_c: float, t_upload: float, sys: SystemParams) -> RoundCosts:
    """Energy (and time) components of one device in one round."""
    if p_s < 0.0 or p_c < 0.0 or t_upload < 0.0:
        raise ValueError("powers and upload time must be non-negative")
    b = _check_batch(b)
    return RoundCosts(
        t_sense=sys.T0 * b,
        t_compute=b * sys.nu * sys.tau / sys.f_cpu,
        t_upload=t_upload,
        e_sense=sys.T0 * b * p_s,
        e_compute=sys.compute_energy_per_sample * b,
        e_upload=t_upload * p_c,
    )


@dataclass(frozen=True)
class ConstraintCheck:
    """One audited inequality; slack >= 0 means satisfied."""

    name: str
    device: Optional[int]
    lhs: float
    rhs: float
    slack: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "constraint": self.name,
            "device": self.device,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "pass": self.passed,
        }


@dataclass(frozen=True)
class ConstraintReport:
    checks: tuple[ConstraintCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[ConstraintCheck]:
        return [c for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"pass": self.ok, "checks": [c.to_dict() for c in self.checks]}


def _leq(name: str, device: Optional[int], lhs: float, rhs: float, tol: float) -> ConstraintCheck:
    slack = rhs - lhs
    return ConstraintCheck(name, device, lhs, rhs, slack, slack >= -tol)


def _geq(name: str, device: Optional[int], lhs: float, rhs: float, tol: float) -> ConstraintCheck:
    slack = lhs - rhs
    return ConstraintCheck(name, device, lhs, rhs, slack, slack >= -tol)


def audit_constraints(
    sol: "AllocationSolution",
    sched: "BatchSchedule",
    sys: SystemParams,
    devices: list[DeviceProfile],
) -> ConstraintReport:
    """Audit an allocation plus schedule against C1-C5 and the reduced forms.

    C2 is evaluated as the sum of per-round latencies; C3 per device over all
    rounds.  The reduced single-inequality forms are checked with the
    schedule's actual total sample count, which makes them exactly equivalent
    to the direct sums when upload times are common across rounds.
    """
    if len(devices) != sys.K or len(sol.devices) != sys.K:
        raise ValueError(
            f"dimension mismatch: K={sys.K}, devices={len(devices)}, "
            f"allocated={len(sol.devices)}"
        )
    if len(sched.b) != sys.R:
        raise ValueError(
            f"dimension mismatch: schedule has {len(sched.b)} rounds, system has R={sys.R}"
        )

    ch = sys.channel
    checks: list[ConstraintCheck] = []
    b_total = sum(sched.b)

    for prof, alloc in zip(devices, sol.devices):
        cap = ergodic_capacity(alloc.p_c, prof, ch)
        checks.append(_geq("C1_upload_bits", prof.id, alloc.t_cm * cap, sys.D_b, BITS_TOL))

    total_latency = sum(
        round_latency(b, [d.t_cm for d in sol.devices], sys) for b in sched.b
    )
    checks.append(_leq("C2_total_latency", None, total_latency, sys.T_max, TIME_ENERGY_TOL))

    for prof, alloc in zip(devices, sol.devices):
        total_energy = sum(
            round_energy(b, alloc.p_s, alloc.p_c, alloc.t_cm, sys).energy_total
            for b in sched.b
        )
        checks.append(_leq("C3_total_energy", prof.id, total_energy, sys.E_max, TIME_ENERGY_TOL))

    for prof, alloc in zip(devices, sol.devices):
        checks.append(_geq("C4_comm_power_lo", prof.id, alloc.p_c, 0.0, POWER_TOL))
        checks.append(_leq("C4_comm_power_hi", prof.id, alloc.p_c, prof.p_c_max, POWER_TOL))
        checks.append(_geq("C5_sensing_power_lo", prof.id, alloc.p_s, prof.p_s_min, POWER_TOL))
        checks.append(_leq("C5_sensing_power_hi", prof.id, alloc.p_s, prof.p_s_max, POWER_TOL))

    for prof, alloc in zip(devices, sol.devices):
        reduced_t = b_total * sys.time_per_sample + sys.R * alloc.t_cm
        checks.append(_leq("C2_reduced", prof.id, reduced_t, sys.T_max, TIME_ENERGY_TOL))
        reduced_e = (
            b_total * (sys.T0 * alloc.p_s + sys.compute_energy_per_sample)
            + sys.R * alloc.t_cm * alloc.p_c
        )
        checks.append(_leq("C3_reduced", prof.id, reduced_e, sys.E_max, TIME_ENERGY_TOL))

    return ConstraintReport(tuple(checks))
