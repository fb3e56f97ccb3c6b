"""Special functions and grid-search helpers for the capacity model and solver.

The exponential integral on the negative real axis is evaluated with a
two-branch scheme: a power series around zero and a modified Lentz continued
fraction for large arguments.  The series branch switches to extended-precision
arithmetic where float64 would lose the result to cancellation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext
from typing import Callable, Literal

import numpy as np

__all__ = [
    "GridSpec",
    "GridEvaluationError",
    "argmax_on_grid",
    "expint_ei",
    "expint_e1_scaled",
]

# Euler-Mascheroni constant, 60 significant digits.
_GAMMA_STR = "0.577215664901532860606512090082402431042159335939923598805767"
_EULER_GAMMA = float(Decimal(_GAMMA_STR))

_SERIES_CF_SPLIT = 40.0  # |x| above this uses the continued fraction
_FLOAT_SERIES_MAX = 3.0  # |x| up to this is safe in plain float64
_DECIMAL_PREC = 70       # working digits for the extended-precision series
_CF_MAX_ITER = 20000


def _ei_series_float(x: float) -> float:
    # Ei(x) = gamma + ln|x| + sum_k x^k/(k*k!).  Plain float64 is fine while
    # the cancellation factor ~e^(2|x|) keeps the lost digits below ~1e-13.
    total = 0.0
    term = 1.0
    k = 0
    while k < 500:
        k += 1
        term *= x / k
        new_total = total + term / k
        if new_total == total:
            break
        total = new_total
    return _EULER_GAMMA + math.log(-x) + total


def _ei_series_decimal(x: float) -> float:
    # Same series in 70-digit decimal arithmetic.  Near |x| = 40 the partial
    # sums peak around 1e15 while Ei is ~1e-19, so ~35 digits vanish in the
    # final cancellation against gamma + ln|x|; the remaining digits carry
    # the answer with room to spare.
    with localcontext() as ctx:
        ctx.prec = _DECIMAL_PREC
        xd = Decimal(x)
        stop = Decimal("1e-45")
        total = Decimal(0)
        term = Decimal(1)
        k = 0
        while k < 10000:
            k += 1
            term *= xd / k
            total += term / k
            if abs(term) / k < stop:
                break
        result = Decimal(_GAMMA_STR) + (-xd).ln() + total
    return float(result)


def _ei_series(x: float) -> float:
    if -x <= _FLOAT_SERIES_MAX:
        return _ei_series_float(x)
    return _ei_series_decimal(x)


def _e1_scaled_contfrac(z: float) -> float:
    # Modified Lentz evaluation of the Stieltjes continued fraction for
    # e^z*E1(z) = 1/(z+1- 1/(z+3- 4/(z+5- ...))); converges for any z > 0,
    # fastest when z is large.
    tiny = 1e-308
    b = z + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _CF_MAX_ITER + 1):
        a = -float(i) * float(i)
        b += 2.0
        d = a * d + b
        if d == 0.0:
            d = tiny
        d = 1.0 / d
        c = b + a / c
        if c == 0.0:
            c = tiny
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1.1e-16:
            return h
    raise ArithmeticError(f"continued fraction did not converge at z={z!r}")


def _ei_contfrac(x: float) -> float:
    # Ei(x) = -E1(-x) = -e^x * (e^z E1(z)) with z = -x; exp(x) underflows to
    # zero for x below about -745, which is the correct limit value.
    return -math.exp(x) * _e1_scaled_contfrac(-x)


def expint_ei(x: float) -> float:
    """Exponential integral Ei(x) for negative real x.

    Uses the power series for |x| <= 40 and the Lentz continued fraction
    beyond, keeping the relative error at or below ~1e-13 across the whole
    negative axis down to the underflow limit.
    """
    x = float(x)
    if not math.isfinite(x) or x >= 0.0:
        raise ValueError(f"expint_ei is defined for finite x < 0, got {x!r}")
    if -x <= _SERIES_CF_SPLIT:
        return _ei_series(x)
    result = _ei_contfrac(x)
    return result if result != 0.0 else 0.0


def expint_e1_scaled(z: float) -> float:
    """Scaled exponential integral e^z * E1(z) = -e^z * Ei(-z) for z > 0.

    The scaled product stays in normal float range for arbitrarily large z
    (it decays like 1/z), which is what the ergodic-capacity formula needs
    at very low SNR where e^z alone would overflow.
    """
    z = float(z)
    if not math.isfinite(z) or z <= 0.0:
        raise ValueError(f"expint_e1_scaled is defined for finite z > 0, got {z!r}")
    if z <= _SERIES_CF_SPLIT:
        return math.exp(z) * (-_ei_series(-z))
    return _e1_scaled_contfrac(z)


class GridEvaluationError(RuntimeError):
    """Objective evaluation failed at a specific grid point."""

    def __init__(self, x: float, message: str = ""):
        self.x = x
        super().__init__(message or f"objective evaluation failed at grid point x={x!r}")


@dataclass(frozen=True)
class GridSpec:
    """A one-dimensional search grid, linear or logarithmic."""

    lo: float
    hi: float
    points: int
    spacing: Literal["linear", "logarithmic"] = "linear"

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise ValueError(f"grid requires lo < hi, got [{self.lo}, {self.hi}]")
        if self.points < 2:
            raise ValueError(f"grid requires at least 2 points, got {self.points}")
        if self.spacing not in ("linear", "logarithmic"):
            raise ValueError(f"unknown grid spacing {self.spacing!r}")
        if self.spacing == "logarithmic" and self.lo <= 0.0:
            raise ValueError("logarithmic spacing requires lo > 0")

    def values(self) -> np.ndarray:
        if self.spacing == "linear":
            return np.linspace(self.lo, self.hi, self.points)
        return np.geomspace(self.lo, self.hi, self.points)


def argmax_on_grid(f: Callable[[float], float], grid: GridSpec) -> tuple[float, float]:
    """Maximize f over the grid; ties resolve to the smallest abscissa.

    Returns (x_star, f(x_star)).  Any exception raised by f is re-raised as
    GridEvaluationError carrying the offending grid point.
    """
    xs = grid.values()
    vals = np.empty(len(xs))
    for i, x in enumerate(xs):
        xf = float(x)
        try:
            vals[i] = f(xf)
        except Exception as exc:
            raise GridEvaluationError(xf, f"objective failed at x={xf!r}: {exc}") from exc
    if np.isnan(vals).any():
        bad = float(xs[int(np.argmax(np.isnan(vals)))])
        raise GridEvaluationError(bad, f"objective returned NaN at x={bad!r}")
    best = int(np.argmax(vals))  # first occurrence = smallest x on an ascending grid
    return float(xs[best]), float(vals[best])
