"""Round-by-round training simulation under an allocation and batch schedule.

Real SGD is out of scope at desk scale; the loss follows a surrogate
contraction whose stationary level falls with the batch size, which is
enough to compare scheduling policies.  Latency and energy are metered
exactly, and a run stops before any round that would breach a budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import mean, pstdev

import numpy as np

from .allocator import AllocationSolution, max_power_allocation, solve_allocation
from .channel import DeviceProfile
from .costs import SystemParams
from .scheduling import (
    SCHEME_ADAPTIVE,
    SCHEME_DECREASING,
    SCHEME_EQUAL,
    BatchSchedule,
    adaptive_sqrt_schedule,
    baseline_schedule,
)

__all__ = [
    "SurrogateLossModel",
    "RoundRecord",
    "SchemeSummary",
    "step_loss",
    "run_simulation",
    "build_scheme",
    "compare_schemes",
    "SIM_SCHEMES",
]

SIM_SCHEMES = ("proposed", "maxpower", "equal", "decreasing")

REASON_ENERGY = "energy_exhausted"
REASON_TIME = "time_exhausted"

_BUDGET_TOL = 1e-9


@dataclass(frozen=True)
class SurrogateLossModel:
    """Loss recursion F' = max(F_floor, (1-gamma)F + beta_noise/b + noise)."""

    gamma: float = 0.02        # per-round contraction
    beta_noise: float = 0.5    # variance floor coefficient (loss units * samples)
    sigma_sim: float = 0.1     # stochastic perturbation scale
    F1: float = 1.6            # initial loss (~ln 5 for a five-class task)
    F_floor: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma!r}")
        if self.beta_noise < 0.0 or self.sigma_sim < 0.0:
            raise ValueError("beta_noise and sigma_sim must be non-negative")
        if not self.F1 > self.F_floor >= 0.0:
            raise ValueError(
                f"requires F1 > F_floor >= 0, got ({self.F1!r}, {self.F_floor!r})"
            )


@dataclass(frozen=True)
class RoundRecord:
    """Metered outcome of one round (or of the round that could not start)."""

    r: int
    batch: int
    latency_s: float
    cum_time_s: float
    energy_j: tuple[float, ...]
    cum_energy_j: tuple[float, ...]
    loss: float
    terminated: bool = False
    reason: str | None = None


def step_loss(
    model: SurrogateLossModel, F_r: float, b: int, K: int, rng: np.random.Generator
) -> float:
    """Advance the surrogate loss by one round with batch size b."""
    if b < 1:
        raise ValueError(f"batch must be >= 1, got {b!r}")
    if F_r < model.F_floor:
        raise ValueError(f"loss {F_r!r} below the model floor {model.F_floor!r}")
    noise = 0.0
    if model.sigma_sim > 0.0:
        noise = model.sigma_sim * float(rng.standard_normal()) / np.sqrt(K * b)
    return max(model.F_floor, (1.0 - model.gamma) * F_r + model.beta_noise / b + noise)


def run_simulation(
    sys: SystemParams,
    devices: list[DeviceProfile],
    sol: AllocationSolution,
    sched: BatchSchedule,
    model: SurrogateLossModel,
    seed: int,
) -> list[RoundRecord]:
    """Execute the schedule, accruing latency and per-device energy.

    A round that would push cumulative time past T_max or any device's
    cumulative energy past E_max never starts: the run emits a final record
    flagged terminated (with the breach reason) and stops.  Infeasible
    baselines are expected to do exactly this, so termination is data rather
    than an exception.
    """
    if len(devices) != sys.K or len(sol.devices) != sys.K:
        raise ValueError("device list and allocation must both have K entries")

    time_per_sample = sys.time_per_sample
    upload_latency = max(d.t_cm for d in sol.devices)
    energy_per_sample = [
        sys.T0 * d.p_s + sys.compute_energy_per_sample for d in sol.devices
    ]
    upload_energy = [d.t_cm * d.p_c for d in sol.devices]

    rng = np.random.default_rng(seed)
    loss = model.F1
    cum_time = 0.0
    cum_energy = [0.0] * sys.K
    records: list[RoundRecord] = []

    for r, b in enumerate(sched.b, start=1):
        latency = b * time_per_sample + upload_latency
        energy = [b * eps + ue for eps, ue in zip(energy_per_sample, upload_energy)]
        would_exhaust_energy = any(
            ce + e > sys.E_max + _BUDGET_TOL for ce, e in zip(cum_energy, energy)
        )
        would_exhaust_time = cum_time + latency > sys.T_max + _BUDGET_TOL
        if would_exhaust_energy or would_exhaust_time:
            reason = REASON_ENERGY if would_exhaust_energy else REASON_TIME
            records.append(RoundRecord(
                r=r, batch=b, latency_s=0.0, cum_time_s=cum_time,
                energy_j=(0.0,) * sys.K, cum_energy_j=tuple(cum_energy),
                loss=loss, terminated=True, reason=reason,
            ))
            break
        cum_time += latency
        cum_energy = [ce + e for ce, e in zip(cum_energy, energy)]
        loss = step_loss(model, loss, b, sys.K, rng)
        records.append(RoundRecord(
            r=r, batch=b, latency_s=latency, cum_time_s=cum_time,
            energy_j=tuple(energy), cum_energy_j=tuple(cum_energy), loss=loss,
        ))

    return records


def _default_b0(b_sum: int, R: int, b0_frac: float) -> int:
    return max(1, int(b0_frac * b_sum / R))


def build_scheme(
    sys: SystemParams,
    devices: list[DeviceProfile],
    scheme: str,
    b0_frac: float = 0.5,
) -> tuple[AllocationSolution, BatchSchedule]:
    """Allocation + schedule for one comparison scheme.

    proposed    optimized powers, increasing sqrt(r) schedule
    maxpower    peak communication power but the proposed scheme's sample
                budget and schedule (deliberately over budget when the
                optimum was interior)
    equal       optimized powers, flat schedule
    decreasing  optimized powers, decreasing sqrt schedule
    """
    if scheme not in SIM_SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}, expected one of {SIM_SCHEMES}")
    sol = solve_allocation(sys, devices)
    b0 = _default_b0(sol.b_sum, sys.R, b0_frac)
    if scheme == "proposed":
        return sol, adaptive_sqrt_schedule(sol.b_sum, sys.R, b0)
    if scheme == "maxpower":
        forced = max_power_allocation(sys, devices, b_sum=sol.b_sum)
        return forced, adaptive_sqrt_schedule(sol.b_sum, sys.R, b0)
    if scheme == "equal":
        return sol, baseline_schedule(SCHEME_EQUAL, sol.b_sum, sys.R)
    return sol, baseline_schedule(SCHEME_DECREASING, sol.b_sum, sys.R, b0)


@dataclass(frozen=True)
class SchemeSummary:
    scheme: str
    b_sum: int
    mean_final_loss: float
    std_final_loss: float
    rounds_completed: int
    terminated: bool
    reason: str | None
    trajectory: tuple[tuple[float, float], ...]  # (cum_time_s, loss) samples

    def to_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "b_sum": self.b_sum,
            "mean_final_loss": self.mean_final_loss,
            "std_final_loss": self.std_final_loss,
            "rounds_completed": self.rounds_completed,
            "terminated": self.terminated,
            "reason": self.reason,
            "trajectory": [list(point) for point in self.trajectory],
        }


def _trajectory_samples(records: list[RoundRecord], max_points: int = 60) -> tuple:
    executed = [rec for rec in records if not rec.terminated]
    stride = max(1, len(executed) // max_points)
    sampled = executed[::stride]
    if executed and sampled[-1] is not executed[-1]:
        sampled.append(executed[-1])
    return tuple((rec.cum_time_s, rec.loss) for rec in sampled)


def compare_schemes(
    sys: SystemParams,
    devices: list[DeviceProfile],
    schemes: list[str],
    model: SurrogateLossModel,
    seeds: list[int],
    b0_frac: float = 0.5,
) -> list[SchemeSummary]:
    """Run each scheme over the shared seed list (paired for variance
    reduction) and summarize final losses and completed rounds."""
    if len(schemes) < 1:
        raise ValueError("need at least one scheme")
    if len(seeds) < 1:
        raise ValueError("need at least one seed")

    summaries = []
    for scheme in schemes:
        sol, sched = build_scheme(sys, devices, scheme, b0_frac)
        finals = []
        first_records: list[RoundRecord] = []
        for i, seed in enumerate(seeds):
            records = run_simulation(sys, devices, sol, sched, model, seed)
            finals.append(records[-1].loss)
            if i == 0:
                first_records = records
        completed = sum(1 for rec in first_records if not rec.terminated)
        terminated = bool(first_records and first_records[-1].terminated)
        summaries.append(SchemeSummary(
            scheme=scheme,
            b_sum=sol.b_sum,
            mean_final_loss=mean(finals),
            std_final_loss=pstdev(finals) if len(finals) > 1 else 0.0,
            rounds_completed=completed,
            terminated=terminated,
            reason=first_records[-1].reason if terminated else None,
            trajectory=_trajectory_samples(first_records),
        ))
    return summaries
