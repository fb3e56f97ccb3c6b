"""Command-line front end: allocate, schedule, simulate, sweep, sense-quality.

Exit codes are a stable contract: 0 success, 1 usage or I/O error,
2 infeasible or invalid parameter.  Pass --plot to render a figure next to
each delimited output file.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import plots
from .allocator import (
    AllocationSolution,
    InfeasibleAllocationError,
    solve_allocation,
)
from .config import ConfigError, ScenarioConfig, load_config
from .output import write_csv, write_json
from .scheduling import (
    SCHEME_ADAPTIVE,
    SCHEME_DECREASING,
    SCHEME_EQUAL,
    InvalidHyperparameterError,
    adaptive_sqrt_schedule,
    baseline_schedule,
)
from .sensing import quality_vs_power
from .simulation import SIM_SCHEMES, build_scheme, run_simulation
from .units import dbm_to_watts, watts_to_dbm

__all__ = [
    "main",
    "cmd_allocate",
    "cmd_schedule",
    "cmd_simulate",
    "cmd_sweep",
    "cmd_sense_quality",
]

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2


def _figure_path(out_path: str | Path) -> Path:
    return Path(out_path).with_suffix(".png")


def cmd_allocate(config_path: str, out_path: str, plot: bool = False) -> int:
    cfg = load_config(config_path)
    solution = solve_allocation(cfg.system, list(cfg.devices))
    write_json(out_path, solution.to_dict())
    if plot:
        plots.save_allocation_figure(solution, _figure_path(out_path))
    print(f"wrote {out_path} (b_sum={solution.b_sum}, regime={solution.regime})")
    return EXIT_OK


def _schedule_from_config(cfg: ScenarioConfig, b_sum: int):
    scheme = cfg.schedule.scheme
    if cfg.schedule.b0_frac > 1.0:
        raise InvalidHyperparameterError(
            f"b0_frac={cfg.schedule.b0_frac} exceeds the average batch size"
        )
    b0 = max(1, int(cfg.schedule.b0_frac * b_sum / cfg.system.R))
    if scheme == SCHEME_ADAPTIVE:
        return adaptive_sqrt_schedule(b_sum, cfg.system.R, b0)
    if scheme in (SCHEME_EQUAL, SCHEME_DECREASING):
        return baseline_schedule(scheme, b_sum, cfg.system.R, b0)
    raise InvalidHyperparameterError(
        f"schedule scheme {scheme!r} is not a planner (use the simulate command"
        " for online rules)"
    )


def cmd_schedule(alloc_path: str, config_path: str, out_path: str, plot: bool = False) -> int:
    cfg = load_config(config_path)
    with open(alloc_path, "r", encoding="utf-8") as fh:
        solution = AllocationSolution.from_dict(json.load(fh))
    schedule = _schedule_from_config(cfg, solution.b_sum)
    if schedule.total > solution.b_sum:
        raise InvalidHyperparameterError(
            f"schedule spends {schedule.total} samples but the budget is {solution.b_sum}"
        )
    write_csv(out_path, ["round", "batch"],
              [(r, b) for r, b in enumerate(schedule.b, start=1)])
    if plot:
        plots.save_schedule_figure(schedule, _figure_path(out_path))
    print(f"wrote {out_path} (total={schedule.total} of {solution.b_sum})")
    return EXIT_OK


def cmd_simulate(config_path: str, scheme: str, seed: int, out_path: str,
                 plot: bool = False) -> int:
    cfg = load_config(config_path)
    if scheme not in SIM_SCHEMES:
        raise ConfigError(f"scheme must be one of {SIM_SCHEMES}, got {scheme!r}")
    sol, sched = build_scheme(cfg.system, list(cfg.devices), scheme, cfg.schedule.b0_frac)
    records = run_simulation(cfg.system, list(cfg.devices), sol, sched, cfg.model, seed)

    write_csv(
        out_path,
        ["round", "batch", "latency_s", "cum_time_s", "max_cum_energy_j", "loss",
         "terminated"],
        [
            (rec.r, rec.batch, rec.latency_s, rec.cum_time_s,
             max(rec.cum_energy_j) if rec.cum_energy_j else 0.0, rec.loss,
             "true" if rec.terminated else "false")
            for rec in records
        ],
    )
    executed = [rec for rec in records if not rec.terminated]
    terminated = bool(records and records[-1].terminated)
    summary = {
        "scheme": scheme,
        "seed": seed,
        "b_sum": sol.b_sum,
        "regime": sol.regime,
        "rounds_completed": len(executed),
        "terminated": terminated,
        "reason": records[-1].reason if terminated else None,
        "final_loss": records[-1].loss,
        "total_time_s": executed[-1].cum_time_s if executed else 0.0,
        "max_cum_energy_j": max(executed[-1].cum_energy_j) if executed else 0.0,
    }
    summary_path = Path(out_path).with_suffix(".summary.json")
    write_json(summary_path, summary)
    if plot:
        plots.save_simulation_figure(records, _figure_path(out_path))
    print(f"wrote {out_path} and {summary_path} "
          f"({summary['rounds_completed']} rounds, final loss {summary['final_loss']:.4f})")
    return EXIT_OK


def _replace_budget(base, param: str, value: float):
    field = {"emax": "E_max", "tmax": "T_max"}[param]
    return dataclasses.replace(base, **{field: value})


def cmd_sweep(config_path: str, param: str, start: float, stop: float, steps: int,
              out_path: str, plot: bool = False) -> int:
    cfg = load_config(config_path)
    if param not in ("emax", "tmax"):
        raise ConfigError(f"sweep parameter must be 'emax' or 'tmax', got {param!r}")
    if steps < 1:
        raise ConfigError(f"steps must be >= 1, got {steps!r}")
    values = [start] if steps == 1 else list(np.linspace(start, stop, steps))

    header = ["param_value", "b_sum", "regime"]
    header += [f"p_c_w_dev{d.id}" for d in cfg.devices]
    rows = []
    sweep_values, sweep_bsums = [], []
    for value in values:
        system = _replace_budget(cfg.system, param, float(value))
        solution = solve_allocation(system, list(cfg.devices))
        rows.append([float(value), solution.b_sum, solution.regime]
                    + [d.p_c for d in solution.devices])
        sweep_values.append(float(value))
        sweep_bsums.append(solution.b_sum)
    write_csv(out_path, header, rows)
    if plot:
        plots.save_sweep_figure(param, sweep_values, sweep_bsums, _figure_path(out_path))
    print(f"wrote {out_path} ({len(rows)} sweep points)")
    return EXIT_OK


def cmd_sense_quality(config_path: str, powers_dbm: list[float] | None, out_path: str,
                      plot: bool = False) -> int:
    cfg = load_config(config_path)
    q = cfg.quality
    dbm_list = list(q.powers_dbm) if powers_dbm is None else [float(p) for p in powers_dbm]
    if any(b <= a for a, b in zip(dbm_list, dbm_list[1:])):
        raise ConfigError("powers must be strictly increasing")
    powers_w = [dbm_to_watts(p) for p in dbm_list]
    curve = quality_vs_power(
        list(cfg.scene), cfg.chirp, powers_w, q.clutter_psd, q.trials, q.seed,
        epsilon=q.epsilon,
    )
    write_csv(
        out_path,
        ["power_dbm", "ssim_mean", "ssim_std"],
        [(dbm, m, s) for dbm, m, s in zip(dbm_list, curve.ssim_mean, curve.ssim_std)],
    )
    report = {
        "threshold_dbm": watts_to_dbm(curve.threshold_w),
        "threshold_w": curve.threshold_w,
        "saturation_ssim": curve.saturation_ssim,
        "epsilon": curve.epsilon,
        "trials": q.trials,
    }
    report_path = Path(out_path).with_suffix(".threshold.json")
    write_json(report_path, report)
    if plot:
        plots.save_quality_figure(curve, _figure_path(out_path))
    print(f"wrote {out_path} and {report_path} "
          f"(threshold {report['threshold_dbm']:.1f} dBm)")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage problems are exit code 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sc2feel",
                     description="Joint sensing/computation/communication budgeting "
                                 "for federated edge learning.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("allocate", parents=[], help="solve the power/time/budget allocation")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("schedule", help="plan per-round batch sizes from an allocation")
    p.add_argument("--alloc", required=True, help="allocation JSON from 'allocate'")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("simulate", help="run the round-by-round simulation")
    p.add_argument("--config", required=True)
    p.add_argument("--scheme", default="proposed", choices=list(SIM_SCHEMES))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("sweep", help="sweep a budget and record b_sum")
    p.add_argument("--config", required=True)
    p.add_argument("--param", required=True, choices=["emax", "tmax"])
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")

    p = sub.add_parser("sense-quality", help="SSIM versus sensing power curve")
    p.add_argument("--config", required=True)
    p.add_argument("--powers-dbm", type=float, nargs="+", default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--plot", action="store_true")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "allocate":
            return cmd_allocate(args.config, args.out, args.plot)
        if args.command == "schedule":
            return cmd_schedule(args.alloc, args.config, args.out, args.plot)
        if args.command == "simulate":
            return cmd_simulate(args.config, args.scheme, args.seed, args.out, args.plot)
        if args.command == "sweep":
            return cmd_sweep(args.config, args.param, args.start, args.stop,
                             args.steps, args.out, args.plot)
        if args.command == "sense-quality":
            return cmd_sense_quality(args.config, args.powers_dbm, args.out, args.plot)
        parser.error(f"unknown command {args.command!r}")
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"sc2feel: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"sc2feel: malformed JSON: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InfeasibleAllocationError as exc:
        print(f"sc2feel: infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, InvalidHyperparameterError, ValueError) as exc:
        print(f"sc2feel: invalid parameter: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
