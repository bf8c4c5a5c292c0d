"""Command-line surface.

Subcommands:

    spindrift run               --config FILE --out DIR
    spindrift sweep-eps         --config FILE --eps LIST --out DIR
    spindrift probe-lipschitz   --config FILE --out DIR [--distances LIST]
    spindrift probe-uniqueness  --config FILE --levels N --out DIR
    spindrift validate

Exit codes: 0 on success, 1 when a run or probe fails or `validate`
detects a broken invariant, 2 for configuration and usage errors.

`run` honours the mode in the config file and writes the full artifact
set (energy CSV, VTK snapshots, final-state dump, manifest). The sweep
and probe commands write a JSON report plus a small CSV table and print
a summary. SPINDRIFT_THREADS caps FFT parallelism (default: all cores).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from ._version import __version__
from .config import ConfigError, emit_config, parse_config
from .drivers import (
    SweepError,
    build_rotated_perturbations,
    epsilon_sweep,
    lipschitz_probe,
    run,
    uniqueness_probe,
)
from .output import write_outputs
from .spin import SolverConvergenceError
from .validate import run_validation

__all__ = ["main", "build_parser"]

_FLOAT_FMT = "%.17g"


def _float_list(text: str, flag: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x.strip()]
    except ValueError as err:
        raise ConfigError(f"{flag}: expected a comma-separated list of numbers: {err}")
    if not values:
        raise ConfigError(f"{flag}: empty list")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spindrift",
        description="Finite-volume simulator for coupled magnetization / "
        "spin-accumulation dynamics in ferromagnetic multilayers.",
        epilog="Environment: SPINDRIFT_THREADS caps FFT thread count.",
    )
    parser.add_argument("--version", action="version", version=f"spindrift {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate one trajectory and write artifacts")
    p_run.add_argument("--config", required=True, help="TOML configuration file")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument(
        "--no-vtk", action="store_true", help="skip per-snapshot VTK files"
    )

    p_sweep = sub.add_parser(
        "sweep-eps", help="compare transient runs against the reduced model"
    )
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument(
        "--eps", required=True, help="comma-separated epsilon values, decreasing"
    )
    p_sweep.add_argument("--out", required=True)

    p_lip = sub.add_parser(
        "probe-lipschitz", help="stability of the stationary solve under m perturbations"
    )
    p_lip.add_argument("--config", required=True)
    p_lip.add_argument("--out", required=True)
    p_lip.add_argument(
        "--distances",
        default="1e-1,1e-2,1e-3",
        help="comma-separated H1 perturbation distances (default 1e-1,1e-2,1e-3)",
    )

    p_uni = sub.add_parser(
        "probe-uniqueness", help="trajectory contraction under mesh refinement"
    )
    p_uni.add_argument("--config", required=True)
    p_uni.add_argument("--levels", type=int, default=3, help="refinement levels (default 3)")
    p_uni.add_argument("--out", required=True)

    sub.add_parser("validate", help="run the built-in invariant suite on small grids")
    return parser


def _report_files(out: Path, name: str, payload: dict, rows: list[dict]) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{name}.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    if rows:
        header = list(rows[0])
        lines = [",".join(header)]
        for row in rows:
            lines.append(",".join(_FLOAT_FMT % row[k] for k in header))
        (out / f"{name}.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _cmd_run(args) -> int:
    config = parse_config(args.config)
    t0 = time.perf_counter()
    traj = run(config)
    wall = time.perf_counter() - t0
    manifest = write_outputs(
        traj, args.out, wall_time_s=wall, vtk_snapshots=not args.no_vtk
    )
    print(f"mode {config.mode}: {traj.n_steps} steps, {len(traj.times)} snapshots, "
          f"{wall:.2f}s wall")
    if manifest.energy:
        print(f"energy: total {manifest.energy['total_first']:.6g} -> "
              f"{manifest.energy['total_last']:.6g}, "
              f"worst slack {manifest.energy['worst_slack']:+.3e}")
    for w in manifest.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"artifacts in {args.out} ({len(manifest.files)} files, see manifest.json)")
    return 0


def _cmd_sweep(args) -> int:
    config = parse_config(args.config)
    eps = _float_list(args.eps, "--eps")
    t0 = time.perf_counter()
    report = epsilon_sweep(config, eps)
    wall = time.perf_counter() - t0
    rows = report.rows()
    payload = {
        "eps": report.eps,
        "err_m": report.err_m,
        "err_s": report.err_s,
        "order_m": report.order_m,
        "order_s": report.order_s,
        "wall_time_s": wall,
        "config_toml": emit_config(config),
    }
    _report_files(Path(args.out), "sweep", payload, rows)
    print(f"{'eps':>10}  {'err_m':>12}  {'err_s':>12}")
    for row in rows:
        print(f"{row['eps']:>10.3e}  {row['err_m']:>12.5e}  {row['err_s']:>12.5e}")
    print(f"fitted orders: m {report.order_m:.3f}, s {report.order_s:.3f}  ({wall:.1f}s)")
    return 0


def _cmd_lipschitz(args) -> int:
    config = parse_config(args.config)
    distances = _float_list(args.distances, "--distances")
    m1 = config.build_m0()
    perturbations = build_rotated_perturbations(m1, distances)
    report = lipschitz_probe(m1, perturbations, config.spin, tol=config.tol)
    payload = {
        "distances": report.distances,
        "ratios": report.values,
        "details": report.details,
        "config_toml": emit_config(config),
    }
    rows = [{"distance": d, "ratio": r} for d, r in zip(report.distances, report.values)]
    _report_files(Path(args.out), "lipschitz", payload, rows)
    print(f"{'distance':>10}  {'ratio':>12}")
    for row in rows:
        print(f"{row['distance']:>10.3e}  {row['ratio']:>12.6f}")
    spread = report.details["max_ratio"] / report.details["min_ratio"]
    print(f"ratio spread (max/min): {spread:.3f}")
    return 0


def _cmd_uniqueness(args) -> int:
    config = parse_config(args.config)
    if args.levels < 2:
        raise ConfigError("--levels must be at least 2")
    t0 = time.perf_counter()
    report = uniqueness_probe(config, args.levels)
    wall = time.perf_counter() - t0
    payload = {
        "levels": args.levels,
        "distances": report.values,
        "details": report.details,
        "wall_time_s": wall,
        "config_toml": emit_config(config),
    }
    rows = [
        {"level": float(k), "distance": d} for k, d in enumerate(report.values)
    ]
    _report_files(Path(args.out), "uniqueness", payload, rows)
    print(f"{'pair':>10}  {'distance':>14}")
    for k, d in enumerate(report.values):
        print(f"{k}->{k + 1:<7}  {d:>14.8e}")
    ratios = report.details.get("ratios", [])
    if ratios:
        print("successive ratios:", ", ".join(f"{r:.4f}" for r in ratios))
    print(f"({wall:.1f}s)")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "sweep-eps":
            return _cmd_sweep(args)
        if args.command == "probe-lipschitz":
            return _cmd_lipschitz(args)
        if args.command == "probe-uniqueness":
            return _cmd_uniqueness(args)
        if args.command == "validate":
            return 0 if run_validation() else 1
        parser.error(f"unknown command {args.command!r}")
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except SweepError as err:
        print(f"sweep failed: {err}", file=sys.stderr)
        return 1
    except SolverConvergenceError as err:
        print(f"solver failure: {err}", file=sys.stderr)
        return 1
    except OSError as err:
        print(f"I/O error: {err}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
