"""Convergence-bound evaluators and batch-size schedules.

Given a total sensed-sample budget, the planner either fixes one batch size
(minimizing the three-term error bound) or spreads the budget over rounds:
growing like sqrt(r) (the shipped default), equal, or shrinking like sqrt(r)
as baselines.  A loss-ratio update rule is provided as an online evaluator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "BoundParams",
    "BatchSchedule",
    "InvalidHyperparameterError",
    "lemma1_bound",
    "prop2_bound",
    "optimal_fixed_batch",
    "adaptive_sqrt_schedule",
    "baseline_schedule",
    "loss_ratio_next_batch",
]

SCHEME_ADAPTIVE = "adaptive_sqrt"
SCHEME_EQUAL = "equal"
SCHEME_DECREASING = "decreasing_sqrt"
SCHEME_LOSS_RATIO = "loss_ratio"


class InvalidHyperparameterError(ValueError):
    """Schedule hyperparameter outside its admissible range."""


@dataclass(frozen=True)
class BoundParams:
    """Constants of the convergence bound (smoothness, gradient noise, ...)."""

    eta: float          # learning rate
    L: float            # smoothness constant
    sigma2: float       # gradient-variance bound
    beta: float = 1.0   # relative-variance coefficient (informational)
    tau: int = 10       # local SGD steps per round
    K: int = 6          # participating devices
    F1: float = 1.0     # initial loss
    F_inf: float = 0.0  # loss lower bound

    def __post_init__(self):
        for name in ("eta", "L", "sigma2", "tau", "K", "F1"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")
        if self.F_inf < 0.0:
            raise ValueError(f"F_inf must be >= 0, got {self.F_inf!r}")
        if not self.F1 > self.F_inf:
            raise ValueError(f"requires F1 > F_inf, got ({self.F1!r}, {self.F_inf!r})")

    @property
    def loss_gap(self) -> float:
        return self.F1 - self.F_inf

    @property
    def lr_condition_satisfied(self) -> bool:
        # eta*L + eta^2*L^2*tau*(tau-1) <= 1, the premise of the bound
        x = self.eta * self.L
        return x + x * x * self.tau * (self.tau - 1) <= 1.0 + 1e-12


def lemma1_bound(bp: BoundParams, b: int, R: int) -> float:
    """Average-squared-gradient bound after R rounds with fixed batch b."""
    if b < 1 or R < 1:
        raise ValueError(f"requires b >= 1 and R >= 1, got ({b!r}, {R!r})")
    first = 2.0 * bp.loss_gap / (bp.eta * R * bp.tau)
    variance = bp.eta * bp.L * bp.sigma2 / (bp.K * b)
    drift = bp.eta ** 2 * bp.L ** 2 * bp.sigma2 * bp.tau / b
    return first + variance + drift


def prop2_bound(bp: BoundParams, b: int, b_sum: int) -> float:
    """Same bound re-parameterized by the total sample budget (R = b_sum/b)."""
    if b < 1 or b_sum < 1:
        raise ValueError(f"requires b >= 1 and b_sum >= 1, got ({b!r}, {b_sum!r})")
    first = 2.0 * bp.loss_gap * b / (bp.eta * bp.tau * b_sum)
    variance = bp.eta * bp.L * bp.sigma2 / (bp.K * b)
    drift = bp.eta ** 2 * bp.L ** 2 * bp.sigma2 * bp.tau / b
    return first + variance + drift


def optimal_fixed_batch(bp: BoundParams, b_sum: int) -> int:
    """Closed-form minimizer of prop2_bound, integerized.

    The continuous optimum is sqrt(eta^2*L*sigma2*tau*b_sum*(1+eta*K*L*tau)
    / (2K*(F1-F_inf))); by convexity the integer minimizer is its floor or
    ceiling, decided by direct bound comparison (plain rounding can miss the
    true argmin because the crossover sits at the geometric mean).
    """
    if b_sum < 1:
        raise ValueError(f"b_sum must be >= 1, got {b_sum!r}")
    numerator = bp.eta ** 2 * bp.L * bp.sigma2 * bp.tau * b_sum * (1.0 + bp.eta * bp.K * bp.L * bp.tau)
    b_cont = math.sqrt(numerator / (2.0 * bp.K * bp.loss_gap))
    lo = max(1, min(b_sum, math.floor(b_cont)))
    hi = max(1, min(b_sum, math.ceil(b_cont)))
    if lo == hi:
        return lo
    return lo if prop2_bound(bp, lo, b_sum) <= prop2_bound(bp, hi, b_sum) else hi


@dataclass(frozen=True)
class BatchSchedule:
    """Integer batch sizes per round plus the generating parameters."""

    b: tuple[int, ...]
    b0: int
    alpha: float
    scheme: str

    def __post_init__(self):
        if len(self.b) < 1:
            raise ValueError("schedule must cover at least one round")
        if any(x < 1 for x in self.b):
            raise ValueError("every round needs at least one sample")

    @property
    def total(self) -> int:
        return sum(self.b)

    @property
    def rounds(self) -> int:
        return len(self.b)


def _check_b0(b_sum: int, R: int, b0: int) -> None:
    if b_sum < 1 or R < 1:
        raise ValueError(f"requires b_sum >= 1 and R >= 1, got ({b_sum!r}, {R!r})")
    if b0 < 1 or b0 * R > b_sum:
        raise InvalidHyperparameterError(
            f"b0 must satisfy 1 <= b0 <= b_sum/R, got b0={b0!r} with "
            f"b_sum={b_sum!r}, R={R!r}"
        )


def adaptive_sqrt_schedule(b_sum: int, R: int, b0: int) -> BatchSchedule:
    """Increasing schedule b(r) = floor(alpha*sqrt(r) + b0) spending the
    whole budget.

    Flooring leaves a remainder below b_sum; it is redistributed one sample
    at a time to the rounds with the largest fractional parts (ties to the
    later round), which preserves monotonicity, until the budget is spent or
    every round has been topped up once.
    """
    _check_b0(b_sum, R, b0)
    sqrt_r = [math.sqrt(r) for r in range(1, R + 1)]
    alpha = (b_sum - b0 * R) / sum(sqrt_r)
    continuous = [alpha * s + b0 for s in sqrt_r]
    floors = [math.floor(c) for c in continuous]
    fracs = [c - f for c, f in zip(continuous, floors)]

    target = min(b_sum, sum(floors) + R)
    deficit = target - sum(floors)
    order = sorted(range(R), key=lambda i: (-fracs[i], -i))
    for i in order[:deficit]:
        floors[i] += 1

    return BatchSchedule(b=tuple(floors), b0=b0, alpha=alpha, scheme=SCHEME_ADAPTIVE)


def baseline_schedule(scheme: str, b_sum: int, R: int, b0: int | None = None) -> BatchSchedule:
    """Comparison schedules: equal split or decreasing sqrt (both raw floors,
    deliberately leaving any flooring remainder unspent)."""
    if scheme == SCHEME_EQUAL:
        if b_sum < R:
            raise InvalidHyperparameterError(
                f"equal schedule needs b_sum >= R, got ({b_sum!r}, {R!r})"
            )
        per_round = b_sum // R
        return BatchSchedule(b=(per_round,) * R, b0=per_round, alpha=0.0, scheme=scheme)
    if scheme == SCHEME_DECREASING:
        if b0 is None:
            raise ValueError("decreasing schedule requires b0")
        _check_b0(b_sum, R, b0)
        sqrt_r = [math.sqrt(r) for r in range(1, R + 1)]
        alpha = (b_sum - b0 * R) / sum(sqrt_r)
        batches = [math.floor(alpha * math.sqrt(R - r + 1) + b0) for r in range(1, R + 1)]
        return BatchSchedule(b=tuple(batches), b0=b0, alpha=alpha, scheme=scheme)
    if scheme == SCHEME_ADAPTIVE:
        if b0 is None:
            raise ValueError("adaptive schedule requires b0")
        return adaptive_sqrt_schedule(b_sum, R, b0)
    raise ValueError(f"unknown schedule scheme {scheme!r}")


def loss_ratio_next_batch(b1: int, F1: float, Fr: float) -> int:
    """Online update rule: batch grows as the loss falls, b(r) ~ sqrt(F1/Fr)*b1."""
    if b1 < 1:
        raise ValueError(f"b1 must be >= 1, got {b1!r}")
    if not (F1 > 0.0 and Fr > 0.0):
        raise ValueError(f"losses must be positive, got ({F1!r}, {Fr!r})")
    return max(1, round(math.sqrt(F1 / Fr) * b1))
