"""Figure rendering for the CLI report path.

Each function draws one figure from already-computed results and writes it
next to the delimited output; nothing here feeds back into the numerics.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .sensing import QualityCurve
from .simulation import RoundRecord
from .units import watts_to_dbm

__all__ = [
    "save_allocation_figure",
    "save_schedule_figure",
    "save_simulation_figure",
    "save_sweep_figure",
    "save_quality_figure",
]

_DPI = 150


def _finish(fig, path: str | Path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_allocation_figure(solution, path: str | Path) -> Path:
    """Per-device communication power and upload time."""
    ids = [d.id for d in solution.devices]
    powers_dbm = [watts_to_dbm(d.p_c) for d in solution.devices]
    uploads = [d.t_cm for d in solution.devices]

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.2))
    ax1.bar(ids, powers_dbm, color="tab:blue")
    ax1.set_xlabel("device")
    ax1.set_ylabel("comm. power (dBm)")
    ax1.set_title(f"b_sum = {solution.b_sum} ({solution.regime})")
    ax2.bar(ids, uploads, color="tab:orange")
    ax2.set_xlabel("device")
    ax2.set_ylabel("upload time (s)")
    for ax in (ax1, ax2):
        ax.grid(True, axis="y", alpha=0.3)
    return _finish(fig, path)


def save_schedule_figure(schedule, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    rounds = range(1, schedule.rounds + 1)
    ax.step(rounds, schedule.b, where="mid")
    ax.set_xlabel("communication round")
    ax.set_ylabel("batch size (samples)")
    ax.set_title(f"{schedule.scheme}, total {schedule.total}")
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def save_simulation_figure(records: list[RoundRecord], path: str | Path) -> Path:
    executed = [rec for rec in records if not rec.terminated]
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot([rec.cum_time_s for rec in executed], [rec.loss for rec in executed])
    ax.set_xlabel("training time (s)")
    ax.set_ylabel("loss")
    if records and records[-1].terminated:
        ax.axvline(records[-1].cum_time_s, color="tab:red", linestyle="--",
                   label=records[-1].reason)
        ax.legend()
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def save_sweep_figure(param: str, values: list[float], b_sums: list[int],
                      path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(values, b_sums, marker="o")
    ax.set_xlabel("E_max (J)" if param == "emax" else "T_max (s)")
    ax.set_ylabel("total sensed samples b_sum")
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)


def save_quality_figure(curve: QualityCurve, path: str | Path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    powers_dbm = [watts_to_dbm(p) for p in curve.powers_w]
    ax.errorbar(powers_dbm, curve.ssim_mean, yerr=curve.ssim_std, marker="o",
                capsize=3)
    ax.axvline(watts_to_dbm(curve.threshold_w), color="tab:red", linestyle="--",
               label="quality threshold")
    ax.set_xlabel("sensing power (dBm)")
    ax.set_ylabel("SSIM vs clean reference")
    ax.set_ylim(0.0, 1.05)
    ax.legend()
    ax.grid(True, alpha=0.3)
    return _finish(fig, path)
