"""Scenario files, experiment sweeps, and run output files.

Scenarios are versioned YAML documents describing the workspace, the robot
start poses, and config overrides. Sweeps repeat one scenario across an axis
(weight pairs, team sizes, or communication ranges) times a seed list, one
fully independent run per cell, and tabulate the per-run metrics.

The only randomness in the whole pipeline lives here: a seeded jitter applied
to the start poses, so replicate seeds explore genuinely different runs while
staying exactly reproducible.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
import yaml

from . import engine, mapping
from .engine import RunResult, SimConfig
from .errors import InvalidScenario, ParseError
from .geometry import Circle, ConvexPolygon, Rect, Shape, Vec2
from .world import World

__all__ = [
    "Scenario",
    "SweepSpec",
    "load_scenario",
    "bundled_scenario_names",
    "load_sweep_spec",
    "resolve_starts",
    "run_scenario",
    "run_sweep",
    "summarize_rows",
    "emit_timeline",
    "write_run_outputs",
    "rasterize_run_dir",
    "SWEEP_CSV_COLUMNS",
]

FORMAT_VERSION = 1

SWEEP_CSV_COLUMNS = [
    "axis", "value", "seed", "sim_time_s", "robot_collisions",
    "logged_points", "logged_points_per_second", "terminated", "status", "error",
]

_CONFIG_FIELDS = {f for f in SimConfig.__dataclass_fields__}


@dataclass
class Scenario:
    name: str
    world: World
    starts: list[Vec2]
    config: SimConfig
    default_robot_count: int

    def team(self, n: int | None) -> list[Vec2]:
        count = self.default_robot_count if n is None else n
        if count < 1:
            raise InvalidScenario(f"robot count must be at least 1, got {count}")
        if count > len(self.starts):
            raise InvalidScenario(
                f"scenario {self.name!r} provides {len(self.starts)} starts, "
                f"asked for {count}")
        return self.starts[:count]


@dataclass
class SweepSpec:
    name: str
    scenario: Scenario
    axis: str  # "beta_gamma" | "team_size" | "comm_range"
    values: list
    seeds: list[int]
    robots: int | None = None
    config_overrides: dict = field(default_factory=dict)


def _require(mapping_: dict, key: str, context: str):
    if key not in mapping_:
        raise ParseError(f"{context}: missing required field {key!r}")
    return mapping_[key]


def _vec(value, context: str) -> Vec2:
    try:
        x, y = value
        return Vec2(float(x), float(y))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{context}: expected an [x, y] pair, got {value!r}") from exc


def _parse_obstacle(entry: dict, index: int) -> Shape:
    context = f"obstacle {index}"
    kind = _require(entry, "type", context)
    try:
        if kind == "circle":
            return Circle(_vec(_require(entry, "center", context), context),
                          float(_require(entry, "radius", context)))
        if kind == "rect":
            return Rect(_vec(_require(entry, "min", context), context),
                        _vec(_require(entry, "max", context), context))
        if kind == "polygon":
            vertices = _require(entry, "vertices", context)
            return ConvexPolygon(tuple(_vec(v, context) for v in vertices))
    except ValueError as exc:
        raise ParseError(f"{context}: {exc}") from exc
    raise ParseError(f"{context}: unknown type {kind!r}")


def _obstacle_intersects_bounds(obstacle: Shape, bounds: Rect) -> bool:
    if isinstance(obstacle, Circle):
        # nearest bounds point to the center within one radius
        q = Vec2(min(max(obstacle.center.x, bounds.min.x), bounds.max.x),
                 min(max(obstacle.center.y, bounds.min.y), bounds.max.y))
        return math.hypot(q.x - obstacle.center.x, q.y - obstacle.center.y) <= obstacle.radius
    if isinstance(obstacle, Rect):
        return (obstacle.min.x <= bounds.max.x and obstacle.max.x >= bounds.min.x
                and obstacle.min.y <= bounds.max.y and obstacle.max.y >= bounds.min.y)
    xs = [v.x for v in obstacle.vertices]
    ys = [v.y for v in obstacle.vertices]
    return (min(xs) <= bounds.max.x and max(xs) >= bounds.min.x
            and min(ys) <= bounds.max.y and max(ys) >= bounds.min.y)


def _build_config(overrides: dict, context: str) -> SimConfig:
    unknown = set(overrides) - _CONFIG_FIELDS
    if unknown:
        raise ParseError(f"{context}: unknown config fields {sorted(unknown)}")
    try:
        return SimConfig(**overrides)
    except (InvalidScenario, TypeError) as exc:
        raise ParseError(f"{context}: {exc}") from exc


def _load_yaml(path: Path) -> dict:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{path}: expected a mapping at the top level")
    return doc


def bundled_scenario_names() -> list[str]:
    files = resources.files("tactile_swarm").joinpath("scenarios")
    return sorted(p.name[:-5] for p in files.iterdir() if p.name.endswith(".yaml"))


def _resolve_file(ref: str | Path, subdir: str) -> Path:
    path = Path(ref)
    if path.exists():
        return path
    bundled = resources.files("tactile_swarm").joinpath(subdir, f"{ref}.yaml")
    if bundled.is_file():
        return Path(str(bundled))
    raise ParseError(f"no such file or bundled {subdir[:-1]} name: {ref}")


def load_scenario(path_or_name: str | Path) -> Scenario:
    """Parse and validate a scenario file (or a bundled scenario by name).

    Raises ParseError on malformed documents and InvalidScenario when the
    content violates the run preconditions.
    """
    path = _resolve_file(path_or_name, "scenarios")
    doc = _load_yaml(path)
    context = str(path)

    version = _require(doc, "format_version", context)
    if version != FORMAT_VERSION:
        raise ParseError(f"{context}: unsupported format_version {version}")

    world_doc = _require(doc, "world", context)
    bounds_doc = _require(world_doc, "bounds", f"{context}: world")
    try:
        bounds = Rect(_vec(_require(bounds_doc, "min", "bounds"), "bounds.min"),
                      _vec(_require(bounds_doc, "max", "bounds"), "bounds.max"))
    except ValueError as exc:
        raise ParseError(f"{context}: bounds: {exc}") from exc

    obstacles = tuple(_parse_obstacle(entry, i)
                      for i, entry in enumerate(world_doc.get("obstacles", [])))
    config = _build_config(dict(doc.get("config", {})), f"{context}: config")
    world = World(bounds=bounds, obstacles=obstacles,
                  walls_are_tactile=bool(world_doc.get("walls_are_tactile",
                                                       config.walls_are_tactile)))

    robots_doc = _require(doc, "robots", context)
    starts = [_vec(s, f"{context}: robots.starts[{i}]")
              for i, s in enumerate(_require(robots_doc, "starts", f"{context}: robots"))]
    default_count = int(robots_doc.get("default_count", len(starts)))

    for i, obstacle in enumerate(obstacles):
        if not _obstacle_intersects_bounds(obstacle, bounds):
            raise InvalidScenario(f"{context}: obstacle {i} lies outside the workspace")

    scenario = Scenario(name=str(doc.get("name", path.stem)), world=world,
                        starts=starts, config=config,
                        default_robot_count=default_count)
    # surfaces spacing/overlap problems at load time rather than mid-sweep
    engine._validate_starts(world, scenario.team(default_count), config)
    return scenario


def load_sweep_spec(path_or_name: str | Path) -> SweepSpec:
    """Parse a sweep description file (or a bundled sweep by name)."""
    path = _resolve_file(path_or_name, "sweeps")
    doc = _load_yaml(path)
    context = str(path)

    if _require(doc, "format_version", context) != FORMAT_VERSION:
        raise ParseError(f"{context}: unsupported format_version")
    axis = _require(doc, "axis", context)
    if axis not in ("beta_gamma", "team_size", "comm_range"):
        raise ParseError(f"{context}: unknown axis {axis!r}")
    values = list(_require(doc, "values", context))
    seeds = [int(s) for s in _require(doc, "seeds", context)]
    if not values or not seeds:
        raise ParseError(f"{context}: values and seeds must be non-empty")
    if axis == "beta_gamma":
        values = [(float(b), float(g)) for b, g in values]
    elif axis == "team_size":
        values = [int(v) for v in values]
    else:
        values = [float(v) for v in values]

    scenario = load_scenario(_require(doc, "scenario", context))
    return SweepSpec(
        name=str(doc.get("name", path.stem)),
        scenario=scenario,
        axis=axis,
        values=values,
        seeds=seeds,
        robots=int(doc["robots"]) if "robots" in doc else None,
        config_overrides=dict(doc.get("config", {})),
    )


def resolve_starts(scenario: Scenario, cfg: SimConfig, n_robots: int | None,
                   seed: int) -> list[Vec2]:
    """First n starts with the seeded jitter applied, validated."""
    starts = scenario.team(n_robots)
    if cfg.start_jitter > 0:
        rng = np.random.default_rng(seed)
        offsets = rng.uniform(-cfg.start_jitter, cfg.start_jitter, size=(len(starts), 2))
        starts = [Vec2(p.x + float(dx), p.y + float(dy))
                  for p, (dx, dy) in zip(starts, offsets)]
        starts = [engine.clamp_to_bounds(p, cfg.robot_radius, scenario.world)
                  for p in starts]
    engine._validate_starts(scenario.world, starts, cfg)
    return starts


def _configured(scenario: Scenario, overrides: dict) -> SimConfig:
    base = {f: getattr(scenario.config, f) for f in _CONFIG_FIELDS}
    base.update(overrides)
    return SimConfig(**base)


def run_scenario(scenario: Scenario, seed: int | None = None,
                 n_robots: int | None = None, build_map: bool = True,
                 **config_overrides) -> RunResult:
    """One run of a scenario: jittered starts, then the deterministic engine."""
    cfg = _configured(scenario, config_overrides)
    use_seed = cfg.seed if seed is None else seed
    cfg.seed = use_seed
    starts = resolve_starts(scenario, cfg, n_robots, use_seed)
    return engine.run(scenario.world, starts, cfg, build_map=build_map)


def _axis_overrides(axis: str, value) -> tuple[dict, int | None]:
    if axis == "beta_gamma":
        beta, gamma = value
        return {"beta": beta, "gamma": gamma}, None
    if axis == "team_size":
        return {}, int(value)
    if axis == "comm_range":
        return {"r_comm": value}, None
    raise ValueError(f"unknown axis {axis!r}")


def _format_value(value) -> str:
    if isinstance(value, tuple):
        return ",".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def run_sweep(spec: SweepSpec, out_dir: str | Path | None = None,
              build_map: bool = False) -> list[dict]:
    """One independent run per (axis value, seed); never aborts on a bad cell.

    Returns the per-run rows; when ``out_dir`` is given also writes
    ``results.csv`` and a per-value ``summary.csv``.
    """
    rows: list[dict] = []
    for value in spec.values:
        overrides, axis_robots = _axis_overrides(spec.axis, value)
        overrides = {**spec.config_overrides, **overrides}
        n_robots = axis_robots if axis_robots is not None else spec.robots
        for seed in spec.seeds:
            row = {"axis": spec.axis, "value": _format_value(value), "seed": seed,
                   "sim_time_s": None, "robot_collisions": None,
                   "logged_points": None, "logged_points_per_second": None,
                   "terminated": None, "status": "ok", "error": ""}
            try:
                result = run_scenario(spec.scenario, seed=seed, n_robots=n_robots,
                                      build_map=build_map, **overrides)
                m = result.metrics
                row.update(sim_time_s=m.sim_time,
                           robot_collisions=m.robot_collision_count,
                           logged_points=m.total_logged_points,
                           logged_points_per_second=m.logged_points_per_second,
                           terminated=m.terminated_all)
            except Exception as exc:  # noqa: BLE001 - failed cells become rows
                row.update(status="failed", error=str(exc))
            rows.append(row)

    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "results.csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=SWEEP_CSV_COLUMNS)
            writer.writeheader()
            for row in rows:
                writer.writerow({k: _csv_value(row[k]) for k in SWEEP_CSV_COLUMNS})
        _write_summary(rows, out / "summary.csv")
    return rows


def _csv_value(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value


def summarize_rows(rows: Sequence[dict]) -> list[dict]:
    """Mean/min/max of each metric per axis value, over the ok rows."""
    grouped: dict[str, list[dict]] = {}
    for row in rows:
        grouped.setdefault(row["value"], []).append(row)
    summary = []
    for value, group in grouped.items():
        ok = [r for r in group if r["status"] == "ok"]
        entry = {"axis": group[0]["axis"], "value": value, "runs": len(group),
                 "ok": len(ok)}
        for metric in ("sim_time_s", "robot_collisions", "logged_points",
                       "logged_points_per_second"):
            values = [r[metric] for r in ok]
            entry[f"{metric}_mean"] = sum(values) / len(values) if values else None
            entry[f"{metric}_min"] = min(values) if values else None
            entry[f"{metric}_max"] = max(values) if values else None
        entry["terminated_fraction"] = (
            sum(1 for r in ok if r["terminated"]) / len(ok) if ok else None)
        summary.append(entry)
    return summary


def _write_summary(rows: Sequence[dict], path: Path):
    summary = summarize_rows(rows)
    if not summary:
        return
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(summary[0]))
        writer.writeheader()
        for entry in summary:
            writer.writerow({k: _csv_value(v) for k, v in entry.items()})


def emit_timeline(result: RunResult, path) -> None:
    """CSV of (time_s, cumulative_logged_points), one row per logging event."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time_s", "cumulative_logged_points"])
        for t, count in result.metrics.logged_points_timeline:
            writer.writerow([repr(t), count])


def write_metrics_json(result: RunResult, path) -> None:
    with open(path, "w") as fh:
        json.dump(result.metrics.as_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")


def write_run_outputs(result: RunResult, out_dir: str | Path,
                      trajectories: bool = False, events: bool = False) -> Path:
    """Write the standard per-run artifact set into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_metrics_json(result, out / "metrics.json")
    emit_timeline(result, out / "timeline.csv")
    mapping.write_points_csv([r.logged_points for r in result.robots],
                             out / "points.csv")
    if trajectories:
        engine.write_trajectory_csv(result, out / "trajectory.csv")
    if events:
        engine.write_event_csv(result, out / "events.csv")

    cfg = result.cfg
    bounds = result.world.bounds
    with open(out / "run_config.json", "w") as fh:
        json.dump({
            "bounds": {"min": [bounds.min.x, bounds.min.y],
                       "max": [bounds.max.x, bounds.max.y]},
            "robot_radius": cfg.robot_radius,
            "map_cell_size": cfg.map_cell_size,
            "map_kernel_radius": cfg.map_kernel_radius,
        }, fh, sort_keys=True, indent=2)
        fh.write("\n")

    if result.map is not None:
        mapping.export_grid(result.map.grid, out / "map_states.pgm", "pgm")
        mapping.export_grid(result.map.grid, out / "map_states.csv", "csv")
        density = mapping.interpolate_map(result.map.global_set, result.world,
                                          cfg.map_cell_size, cfg.map_kernel_radius)
        mapping.export_grid(density, out / "map_density.pgm", "pgm")
        mapping.export_grid(density, out / "map_density.csv", "csv")
    return out


def rasterize_run_dir(run_dir: str | Path, cell_size: float | None = None,
                      kernel_radius: float | None = None,
                      out_dir: str | Path | None = None) -> Path:
    """Rebuild the grids of a finished run from its points (and trajectories).

    Reads ``run_config.json`` and ``points.csv``; the tri-state grid is only
    produced when ``trajectory.csv`` is present.
    """
    run_path = Path(run_dir)
    try:
        config = json.loads((run_path / "run_config.json").read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read run_config.json in {run_dir}: {exc}") from exc
    bounds = Rect(Vec2(*config["bounds"]["min"]), Vec2(*config["bounds"]["max"]))
    world = World(bounds=bounds)
    cell = cell_size if cell_size is not None else config["map_cell_size"]
    kernel = kernel_radius if kernel_radius is not None else config["map_kernel_radius"]

    local_sets = mapping.load_points_csv(run_path / "points.csv")
    merged = mapping.aggregate(local_sets)
    out = Path(out_dir) if out_dir is not None else run_path
    out.mkdir(parents=True, exist_ok=True)

    density = mapping.interpolate_map(merged, world, cell, kernel)
    mapping.export_grid(density, out / "map_density.pgm", "pgm")
    mapping.export_grid(density, out / "map_density.csv", "csv")

    trajectory_file = run_path / "trajectory.csv"
    if trajectory_file.exists():
        trajectories: dict[int, list[Vec2]] = {}
        with open(trajectory_file, newline="") as fh:
            for row in csv.DictReader(fh):
                trajectories.setdefault(int(row["robot_id"]), []).append(
                    Vec2(float(row["x"]), float(row["y"])))
        grid = mapping.classify_grid(list(trajectories.values()), merged, world,
                                     cell, config["robot_radius"])
        mapping.export_grid(grid, out / "map_states.pgm", "pgm")
        mapping.export_grid(grid, out / "map_states.csv", "csv")
    return out
