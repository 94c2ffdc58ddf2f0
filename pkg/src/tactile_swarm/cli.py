"""Command line front end: run, sweep, map, validate."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import harness
from .errors import InvalidScenario, ParseError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tactile-swarm",
        description="Deterministic multi-robot contact-mapping simulator.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one scenario and write its outputs")
    run.add_argument("scenario", help="scenario file path or bundled name")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--robots", type=int, default=None,
                     help="team size (default: the scenario's default_count)")
    run.add_argument("--out", type=Path, default=Path("run_out"))
    run.add_argument("--trajectories", action="store_true",
                     help="also write trajectory.csv")
    run.add_argument("--events", action="store_true", help="also write events.csv")

    sweep = sub.add_parser("sweep", help="run a parameter sweep")
    sweep.add_argument("spec", help="sweep file path or bundled name")
    sweep.add_argument("--out", type=Path, default=Path("sweep_out"))

    map_cmd = sub.add_parser("map", help="re-rasterize the grids of a finished run")
    map_cmd.add_argument("run_dir", type=Path)
    map_cmd.add_argument("--cell-size", type=float, default=None)
    map_cmd.add_argument("--kernel-radius", type=float, default=None)
    map_cmd.add_argument("--out", type=Path, default=None)

    validate = sub.add_parser("validate", help="check a scenario file")
    validate.add_argument("scenario", help="scenario file path or bundled name")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            scenario = harness.load_scenario(args.scenario)
            result = harness.run_scenario(scenario, seed=args.seed,
                                          n_robots=args.robots)
            out = harness.write_run_outputs(result, args.out,
                                            trajectories=args.trajectories,
                                            events=args.events)
            m = result.metrics
            status = "terminated" if m.terminated_all else "hit the step cap"
            print(f"{scenario.name}: {status} at t={m.sim_time:g}s, "
                  f"{m.total_logged_points} points, "
                  f"{m.robot_collision_count} robot collisions -> {out}")
        elif args.command == "sweep":
            spec = harness.load_sweep_spec(args.spec)
            rows = harness.run_sweep(spec, out_dir=args.out)
            failed = sum(1 for r in rows if r["status"] != "ok")
            print(f"{spec.name}: {len(rows)} runs ({failed} failed) -> {args.out}")
        elif args.command == "map":
            out = harness.rasterize_run_dir(args.run_dir, cell_size=args.cell_size,
                                            kernel_radius=args.kernel_radius,
                                            out_dir=args.out)
            print(f"grids written to {out}")
        elif args.command == "validate":
            scenario = harness.load_scenario(args.scenario)
            print(f"{scenario.name}: valid "
                  f"({len(scenario.starts)} starts, "
                  f"{len(scenario.world.obstacles)} obstacles)")
    except (ParseError, InvalidScenario) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
