"""Sample-budget maximization: sensing power, communication power, upload time.

The joint problem collapses to one scalar search per device: sensing power
pins to its lower limit, the upload-time constraint is met with equality,
and what remains is maximizing the per-device sample bound Phi(p_c) over the
communication power by grid search.  The total budget is the worst device's
bound, floored to an integer sample count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .channel import DeviceProfile, ergodic_capacity
from .costs import SystemParams
from .numerics import GridSpec, argmax_on_grid

__all__ = [
    "DeviceAllocation",
    "AllocationSolution",
    "InfeasibleAllocationError",
    "optimal_sensing_power",
    "phi_k",
    "solve_allocation",
    "max_power_allocation",
]

GRID_POINTS = 2000
REFINE_POINTS = 200
GRID_LO_FRACTION = 1e-6  # lower search endpoint as a fraction of p_c_max

REGIME_LATENCY = "latency_limited"
REGIME_ENERGY = "energy_limited"
REGIME_MIXED = "mixed"


class InfeasibleAllocationError(Exception):
    """No positive sample budget exists under the given time/energy budgets."""

    def __init__(self, device_id: int, latency_bound: float, energy_bound: float):
        self.device_id = device_id
        self.latency_bound = latency_bound
        self.energy_bound = energy_bound
        binding = "latency" if latency_bound <= energy_bound else "energy"
        super().__init__(
            f"infeasible budgets: device {device_id} supports at most "
            f"{min(latency_bound, energy_bound):.3f} samples at its best power "
            f"(latency bound {latency_bound:.3f}, energy bound {energy_bound:.3f}; "
            f"binding constraint: {binding})"
        )


@dataclass(frozen=True)
class DeviceAllocation:
    """Per-device operating point (all powers in W, time in s)."""

    id: int
    p_s: float
    p_c: float
    t_cm: float
    # diagnostics, not part of the serialized contract
    sample_bound: float = field(default=math.nan, compare=False)
    latency_bound: float = field(default=math.nan, compare=False)
    energy_bound: float = field(default=math.nan, compare=False)
    binding: str = field(default="", compare=False)


@dataclass(frozen=True)
class AllocationSolution:
    """Step-1 output: operating points plus the global sample budget."""

    devices: tuple[DeviceAllocation, ...]
    b_sum: int
    regime: str

    def to_dict(self) -> dict:
        return {
            "devices": [
                {"id": d.id, "p_s_w": d.p_s, "p_c_w": d.p_c, "t_cm_s": d.t_cm}
                for d in self.devices
            ],
            "b_sum": self.b_sum,
            "regime": self.regime,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AllocationSolution":
        devices = tuple(
            DeviceAllocation(
                id=int(entry["id"]),
                p_s=float(entry["p_s_w"]),
                p_c=float(entry["p_c_w"]),
                t_cm=float(entry["t_cm_s"]),
            )
            for entry in data["devices"]
        )
        return cls(devices=devices, b_sum=int(data["b_sum"]), regime=str(data["regime"]))


def optimal_sensing_power(dev: DeviceProfile) -> float:
    """The energy-side sample bound decreases in sensing power, so the optimum
    sits at the quality floor p_s_min."""
    return dev.p_s_min


def _bounds(p_c: float, dev: DeviceProfile, sys: SystemParams) -> tuple[float, float]:
    cap = ergodic_capacity(p_c, dev, sys.channel)
    upload_time = sys.D_b / cap
    latency = (sys.T_max - sys.R * upload_time) / sys.time_per_sample
    energy_denom = sys.T0 * optimal_sensing_power(dev) + sys.compute_energy_per_sample
    energy = (sys.E_max - sys.R * p_c * upload_time) / energy_denom
    return latency, energy


def phi_k(p_c: float, dev: DeviceProfile, sys: SystemParams) -> float:
    """Per-device sample bound at communication power p_c (may be negative,
    signalling infeasibility at that power)."""
    if not p_c > 0.0:
        raise ValueError(f"phi_k requires p_c > 0, got {p_c!r}")
    latency, energy = _bounds(p_c, dev, sys)
    return min(latency, energy)


def _search_device(
    dev: DeviceProfile, sys: SystemParams, grid_points: int, refine_points: int
) -> tuple[float, float]:
    objective = lambda p: phi_k(p, dev, sys)
    coarse = GridSpec(dev.p_c_max * GRID_LO_FRACTION, dev.p_c_max, grid_points, "logarithmic")
    x0, f0 = argmax_on_grid(objective, coarse)

    # one local refinement pass spanning the coarse optimum's neighbors
    xs = coarse.values()
    idx = int(min(range(len(xs)), key=lambda i: abs(xs[i] - x0)))
    lo = float(xs[max(idx - 1, 0)])
    hi = float(xs[min(idx + 1, len(xs) - 1)])
    if lo < hi:
        x1, f1 = argmax_on_grid(objective, GridSpec(lo, hi, refine_points, "linear"))
        if f1 > f0 or (f1 == f0 and x1 < x0):
            return x1, f1
    return x0, f0


def _device_allocation(
    dev: DeviceProfile, sys: SystemParams, p_c: float
) -> DeviceAllocation:
    latency, energy = _bounds(p_c, dev, sys)
    cap = ergodic_capacity(p_c, dev, sys.channel)
    at_peak = p_c >= dev.p_c_max * (1.0 - 1e-9)
    binding = "latency" if (at_peak and latency < energy) else "energy"
    return DeviceAllocation(
        id=dev.id,
        p_s=optimal_sensing_power(dev),
        p_c=p_c,
        t_cm=sys.D_b / cap,
        sample_bound=min(latency, energy),
        latency_bound=latency,
        energy_bound=energy,
        binding=binding,
    )


def _classify(allocations: list[DeviceAllocation]) -> str:
    if all(a.binding == "latency" for a in allocations):
        return REGIME_LATENCY
    if all(a.binding == "energy" for a in allocations):
        return REGIME_ENERGY
    return REGIME_MIXED


def solve_allocation(
    sys: SystemParams,
    devices: list[DeviceProfile],
    grid_points: int = GRID_POINTS,
    refine_points: int = REFINE_POINTS,
) -> AllocationSolution:
    """Per-device argmax of the sample bound, then the global budget.

    Raises InfeasibleAllocationError when the worst device cannot support a
    single sample at its best operating point.
    """
    if len(devices) != sys.K:
        raise ValueError(f"expected {sys.K} devices, got {len(devices)}")

    allocations = []
    for dev in devices:
        p_star, _ = _search_device(dev, sys, grid_points, refine_points)
        allocations.append(_device_allocation(dev, sys, p_star))

    worst = min(allocations, key=lambda a: a.sample_bound)
    if worst.sample_bound < 1.0:
        raise InfeasibleAllocationError(worst.id, worst.latency_bound, worst.energy_bound)

    return AllocationSolution(
        devices=tuple(allocations),
        b_sum=int(math.floor(worst.sample_bound)),
        regime=_classify(allocations),
    )


def max_power_allocation(
    sys: SystemParams,
    devices: list[DeviceProfile],
    b_sum: int | None = None,
) -> AllocationSolution:
    """Operating points with every device transmitting at peak power.

    When b_sum is given it is adopted verbatim (the max-power baseline keeps
    the optimized schedule and may therefore overrun its energy budget);
    otherwise the budget implied by the peak-power bounds is used.
    """
    if len(devices) != sys.K:
        raise ValueError(f"expected {sys.K} devices, got {len(devices)}")
    allocations = [_device_allocation(dev, sys, dev.p_c_max) for dev in devices]
    if b_sum is None:
        worst = min(allocations, key=lambda a: a.sample_bound)
        if worst.sample_bound < 1.0:
            raise InfeasibleAllocationError(worst.id, worst.latency_bound, worst.energy_bound)
        b_sum = int(math.floor(worst.sample_bound))
    return AllocationSolution(
        devices=tuple(allocations),
        b_sum=int(b_sum),
        regime=_classify(allocations),
    )
