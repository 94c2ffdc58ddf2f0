"""Deterministic discrete-time simulation loop.

Each step: take one position snapshot, move every robot in ascending id
order, resolve wall/obstacle overlap, detect robot-robot collisions and
surface contacts, log contact points, and reselect goals for robots that hit
something, arrived, or finished backing off. A robot stops forever once it
has logged its quota of contact points.

The loop is RNG-free and single-threaded per run: identical inputs produce
bit-identical trajectories, events, and metrics. Parallelism belongs across
runs, never inside one.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from . import agent, mapping
from .agent import CostWeights
from .errors import InvalidScenario
from .geometry import Circle, ConvexPolygon, Rect, Vec2, euclidean
from .world import World, clamp_to_bounds, contact_query

__all__ = [
    "Phase",
    "SimConfig",
    "RobotState",
    "ContactEvent",
    "RunMetrics",
    "SimState",
    "RunResult",
    "step",
    "run",
    "path_redundancy",
    "write_trajectory_csv",
    "write_event_csv",
]


class Phase(str, Enum):
    EXPLORING = "exploring"
    BACKING_OFF = "backing_off"
    TERMINATED = "terminated"


@dataclass
class SimConfig:
    """Every tunable of a run. Defaults are e-puck scale in a meter-scale arena."""

    dt: float = 0.25                      # decision/integration step, seconds
    robot_radius: float = 0.037
    speed: float = 0.057                  # commanded speed, m/s
    tactile_range: float = 0.005          # feeler reach beyond the disc
    goal_radius: float = 0.3              # candidate circle radius r
    candidate_count: int = 360            # candidates per reselection P
    beta: float = 0.9                     # crowding weight
    gamma: float = 0.1                    # redundancy weight
    redundancy_exponent: int = 2
    r_comm: float = 3.0
    d_min: float | None = None            # collision distance, defaults to 2 * robot_radius
    points_to_log: int = 100              # per-robot termination threshold M
    max_steps: int = 20000
    backoff_distance: float = 0.05
    seed: int = 1                         # used only for start jitter in the harness
    log_at_robot_center: bool = False
    walls_are_tactile: bool = True
    goal_reached_tolerance: float = 0.01
    min_point_separation: float = 0.002   # duplicate filter during continuous contact
    collision_hysteresis: float = 0.01    # pair re-arms beyond d_min + hysteresis
    backoff_on_obstacle: bool = False
    stall_fraction: float = 0.25          # blocked when net travel falls below this share
    redundancy_cell_size: float = 0.05    # cell for the revisit metric
    map_cell_size: float = 0.01
    map_kernel_radius: float = 0.05
    start_jitter: float = 0.02            # seeded start perturbation, harness only

    def __post_init__(self):
        if self.d_min is None:
            self.d_min = 2.0 * self.robot_radius
        if min(self.dt, self.speed, self.goal_radius) <= 0:
            raise InvalidScenario("dt, speed, and goal_radius must be positive")
        if self.candidate_count < 1 or self.points_to_log < 1 or self.max_steps < 1:
            raise InvalidScenario("candidate_count, points_to_log, max_steps must be >= 1")
        if self.d_min < 2.0 * self.robot_radius:
            raise InvalidScenario(
                f"d_min {self.d_min} smaller than robot diameter {2 * self.robot_radius}"
            )

    @property
    def weights(self) -> CostWeights:
        return CostWeights(self.beta, self.gamma, self.redundancy_exponent)


@dataclass
class RobotState:
    """One robot's pose, goal, logged points, and life-cycle bookkeeping."""

    id: int
    position: Vec2
    velocity: Vec2 = Vec2(0.0, 0.0)
    goal: Vec2 | None = None
    logged_points: list[Vec2] = field(default_factory=list)
    path_history: list[Vec2] = field(default_factory=list)
    phase: Phase = Phase.EXPLORING
    # engine internals
    backoff_remaining: float = 0.0
    backoff_direction: Vec2 | None = None
    last_heading: Vec2 | None = None
    in_contact_prev: bool = False
    last_logged: Vec2 | None = None
    needs_reselect: bool = False


@dataclass(frozen=True)
class ContactEvent:
    """One discrete event: a surface touch, a robot collision, an arrival, or a stop."""

    step: int
    kind: str  # "obstacle_contact" | "robot_collision" | "goal_reached" | "terminated"
    robot_id: int
    robot_b: int | None = None
    point: Vec2 | None = None
    source: str | None = None  # "wall" or "obstacle:<index>"


@dataclass
class RunMetrics:
    sim_time: float
    robot_collision_count: int
    total_logged_points: int
    logged_points_per_second: float
    per_robot_logged_counts: list[int]
    logged_points_timeline: list[tuple[float, int]]
    path_redundancy: list[int]
    terminated_all: bool

    def as_dict(self) -> dict:
        return {
            "sim_time": self.sim_time,
            "robot_collision_count": self.robot_collision_count,
            "total_logged_points": self.total_logged_points,
            "logged_points_per_second": self.logged_points_per_second,
            "per_robot_logged_counts": self.per_robot_logged_counts,
            "logged_points_timeline": [[t, c] for t, c in self.logged_points_timeline],
            "path_redundancy": self.path_redundancy,
            "terminated_all": self.terminated_all,
        }


@dataclass
class SimState:
    """Full mutable state of one run."""

    world: World
    robots: list[RobotState]
    step_index: int = 0
    # robot pairs currently inside an unresolved collision episode
    active_collision_pairs: set[tuple[int, int]] = field(default_factory=set)


def _unit(v: Vec2) -> Vec2 | None:
    n = v.norm()
    if n == 0.0:
        return None
    return Vec2(v.x / n, v.y / n)


def _shape_reference_point(shape) -> Vec2:
    if isinstance(shape, Circle):
        return shape.center
    if isinstance(shape, Rect):
        return Vec2(0.5 * (shape.min.x + shape.max.x), 0.5 * (shape.min.y + shape.max.y))
    if isinstance(shape, ConvexPolygon):
        n = len(shape.vertices)
        return Vec2(sum(v.x for v in shape.vertices) / n,
                    sum(v.y for v in shape.vertices) / n)
    raise TypeError(f"unknown shape {type(shape)}")


def resolve_obstacle_overlap(p: Vec2, robot_radius: float, world: World) -> Vec2:
    """Push a robot center out of any obstacle it overlaps.

    Obstacles are rigid: the disc may touch a surface but never sink into it.
    Per-step travel is far smaller than the robot radius, so one or two
    passes always suffice.
    """
    for _ in range(2):
        moved = False
        for obstacle in world.obstacles:
            d = obstacle.signed_distance(p)
            if d >= robot_radius:
                continue
            bp = obstacle.closest_boundary_point(p)
            if d > 0.0:
                outward = _unit(p - bp)
            elif d < 0.0:
                outward = _unit(bp - p)
            else:
                outward = _unit(p - _shape_reference_point(obstacle))
            if outward is None:  # degenerate: center exactly on reference point
                outward = Vec2(1.0, 0.0)
            p = Vec2(bp.x + outward.x * robot_radius, bp.y + outward.y * robot_radius)
            moved = True
        if not moved:
            break
        p = clamp_to_bounds(p, robot_radius, world)
    return p


def _enter_backoff(robot: RobotState, cfg: SimConfig, away_from: Vec2 | None = None):
    direction = None
    if robot.last_heading is not None:
        direction = Vec2(-robot.last_heading.x, -robot.last_heading.y)
    elif away_from is not None:
        direction = _unit(robot.position - away_from)
    if direction is None:
        direction = Vec2(1.0, 0.0)
    robot.phase = Phase.BACKING_OFF
    robot.backoff_direction = direction
    robot.backoff_remaining = cfg.backoff_distance
    robot.needs_reselect = False


def _reselect_goal(robot: RobotState, snapshot: list[tuple[int, Vec2]], cfg: SimConfig):
    neighbors = [
        pos for rid, pos in snapshot
        if rid != robot.id and euclidean(robot.position, pos) <= cfg.r_comm
    ]
    candidates = agent.generate_candidates(robot.position, cfg.goal_radius,
                                           cfg.candidate_count)
    goal, _ = agent.select_goal(candidates, neighbors, robot.logged_points, cfg.weights)
    robot.goal = goal
    robot.needs_reselect = False


def step(state: SimState, cfg: SimConfig) -> list[ContactEvent]:
    """Advance the simulation by one time step, mutating ``state`` in place.

    Returns the events that occurred during the step, in a fixed order:
    collisions first (by pair), then per-robot touches, arrivals, and stops
    in ascending id order.
    """
    state.step_index += 1
    now = state.step_index
    events: list[ContactEvent] = []
    world = state.world
    # all goal selections this step read the same start-of-step snapshot
    snapshot = [(r.id, r.position) for r in state.robots]

    # motion
    for robot in state.robots:
        if robot.phase is Phase.TERMINATED:
            continue
        was_exploring = robot.phase is Phase.EXPLORING
        if robot.phase is Phase.BACKING_OFF:
            travel = min(cfg.speed * cfg.dt, robot.backoff_remaining)
            d = robot.backoff_direction
            robot.velocity = Vec2(d.x * cfg.speed, d.y * cfg.speed)
            new_pos = Vec2(robot.position.x + d.x * travel, robot.position.y + d.y * travel)
            robot.backoff_remaining -= travel
            if robot.backoff_remaining <= 1e-12:
                robot.phase = Phase.EXPLORING
                robot.needs_reselect = True
        else:
            robot.velocity = agent.velocity_toward(robot.position, robot.goal, cfg.speed,
                                                   cfg.goal_reached_tolerance)
            new_pos = Vec2(robot.position.x + robot.velocity.x * cfg.dt,
                           robot.position.y + robot.velocity.y * cfg.dt)
        new_pos = clamp_to_bounds(new_pos, cfg.robot_radius, world)
        new_pos = resolve_obstacle_overlap(new_pos, cfg.robot_radius, world)
        heading = _unit(robot.velocity)
        if heading is not None:
            robot.last_heading = heading
        commanded = robot.velocity.norm() * cfg.dt
        actual = euclidean(new_pos, robot.position)
        robot.position = new_pos
        # a rigid surface is swallowing the commanded motion: a physical
        # robot cannot keep pushing, so take the move-back branch
        if (was_exploring and commanded > 0.0
                and actual < cfg.stall_fraction * commanded):
            _enter_backoff(robot, cfg)

    for robot in state.robots:
        if robot.phase is not Phase.TERMINATED:
            robot.path_history.append(robot.position)

    # robot-robot collisions on post-move positions, debounced per episode
    n = len(state.robots)
    for i in range(n):
        for j in range(i + 1, n):
            a, b = state.robots[i], state.robots[j]
            if a.phase is Phase.TERMINATED and b.phase is Phase.TERMINATED:
                continue
            dist = euclidean(a.position, b.position)
            key = (a.id, b.id)
            if dist < cfg.d_min:
                fresh = key not in state.active_collision_pairs
                if fresh:
                    state.active_collision_pairs.add(key)
                    events.append(ContactEvent(step=now, kind="robot_collision",
                                               robot_id=a.id, robot_b=b.id))
                for robot, other in ((a, b), (b, a)):
                    if robot.phase is Phase.TERMINATED:
                        continue
                    # retrigger on a lingering episode so the violation is
                    # always being actively resolved, but without recounting
                    if fresh or robot.phase is not Phase.BACKING_OFF:
                        _enter_backoff(robot, cfg, away_from=other.position)
            elif dist >= cfg.d_min + cfg.collision_hysteresis:
                state.active_collision_pairs.discard(key)

    # surface contact: log the touch point and force a new goal
    for robot in state.robots:
        if robot.phase is Phase.TERMINATED:
            continue
        result = contact_query(robot.position, cfg.robot_radius, cfg.tactile_range, world)
        if result.in_contact:
            point = robot.position if cfg.log_at_robot_center else result.contact_point
            duplicate = (robot.in_contact_prev and robot.last_logged is not None
                         and euclidean(point, robot.last_logged) < cfg.min_point_separation)
            if not duplicate and len(robot.logged_points) < cfg.points_to_log:
                robot.logged_points.append(point)
                robot.last_logged = point
                source = ("wall" if result.source == "wall"
                          else f"obstacle:{result.obstacle_index}")
                events.append(ContactEvent(step=now, kind="obstacle_contact",
                                           robot_id=robot.id, point=point, source=source))
            if robot.phase is Phase.EXPLORING:
                if cfg.backoff_on_obstacle:
                    _enter_backoff(robot, cfg, away_from=point)
                else:
                    robot.needs_reselect = True
            robot.in_contact_prev = True
        else:
            robot.in_contact_prev = False

    # arrivals
    for robot in state.robots:
        if robot.phase is Phase.EXPLORING and robot.goal is not None:
            if euclidean(robot.position, robot.goal) < cfg.goal_reached_tolerance:
                events.append(ContactEvent(step=now, kind="goal_reached",
                                           robot_id=robot.id, point=robot.position))
                robot.needs_reselect = True

    # termination: quota reached, stop forever
    for robot in state.robots:
        if robot.phase is not Phase.TERMINATED and len(robot.logged_points) >= cfg.points_to_log:
            robot.phase = Phase.TERMINATED
            robot.velocity = Vec2(0.0, 0.0)
            robot.goal = None
            robot.needs_reselect = False
            events.append(ContactEvent(step=now, kind="terminated",
                                       robot_id=robot.id, point=robot.position))

    # goal reselection for everyone flagged this step
    for robot in state.robots:
        if robot.needs_reselect and robot.phase is Phase.EXPLORING:
            _reselect_goal(robot, snapshot, cfg)

    return events


@dataclass
class RunResult:
    metrics: RunMetrics
    map: mapping.ExplorationMap | None
    robots: list[RobotState]
    events: list[ContactEvent]
    trajectory_rows: list[tuple]
    world: World
    cfg: SimConfig

    @property
    def trajectories(self) -> list[list[Vec2]]:
        return [r.path_history for r in self.robots]


def _validate_starts(world: World, starts: Sequence[Vec2], cfg: SimConfig):
    if not starts:
        raise InvalidScenario("need at least one robot start position")
    for i, p in enumerate(starts):
        if world.bounds.signed_distance(p) > -cfg.robot_radius:
            raise InvalidScenario(f"start {i} at {p} does not fit inside the workspace")
        for k, obstacle in enumerate(world.obstacles):
            if obstacle.signed_distance(p) < cfg.robot_radius:
                raise InvalidScenario(f"start {i} at {p} overlaps obstacle {k}")
    for i in range(len(starts)):
        for j in range(i + 1, len(starts)):
            if euclidean(starts[i], starts[j]) < cfg.d_min:
                raise InvalidScenario(
                    f"starts {i} and {j} closer than d_min={cfg.d_min}"
                )


def run(world: World, starts: Sequence[Vec2], cfg: SimConfig,
        build_map: bool = True) -> RunResult:
    """Run to completion: all robots terminated or ``max_steps`` reached.

    ``starts`` must be pairwise at least d_min apart, inside bounds, and
    clear of obstacles. Hitting the step cap is a reportable outcome, not an
    error: the metrics carry ``terminated_all=False``.
    """
    _validate_starts(world, starts, cfg)

    robots = [RobotState(id=i, position=p) for i, p in enumerate(starts)]
    state = SimState(world=world, robots=robots)
    snapshot = [(r.id, r.position) for r in robots]
    for robot in robots:
        robot.path_history.append(robot.position)
        _reselect_goal(robot, snapshot, cfg)

    trajectory_rows: list[tuple] = []
    events: list[ContactEvent] = []
    timeline: list[tuple[float, int]] = []
    collision_count = 0
    logged_total = 0

    def record_rows():
        t = state.step_index * cfg.dt
        for r in robots:
            gx = r.goal.x if r.goal is not None else None
            gy = r.goal.y if r.goal is not None else None
            trajectory_rows.append((state.step_index, t, r.id, r.position.x,
                                    r.position.y, r.phase.value, gx, gy))

    record_rows()
    while state.step_index < cfg.max_steps:
        step_events = step(state, cfg)
        events.extend(step_events)
        for ev in step_events:
            if ev.kind == "robot_collision":
                collision_count += 1
            elif ev.kind == "obstacle_contact":
                logged_total += 1
                timeline.append((ev.step * cfg.dt, logged_total))
        record_rows()
        if all(r.phase is Phase.TERMINATED for r in robots):
            break

    terminated_all = all(r.phase is Phase.TERMINATED for r in robots)
    sim_time = state.step_index * cfg.dt
    per_robot = [len(r.logged_points) for r in robots]
    metrics = RunMetrics(
        sim_time=sim_time,
        robot_collision_count=collision_count,
        total_logged_points=sum(per_robot),
        logged_points_per_second=sum(per_robot) / sim_time,
        per_robot_logged_counts=per_robot,
        logged_points_timeline=timeline,
        path_redundancy=[path_redundancy(r.path_history, cfg.redundancy_cell_size)
                         for r in robots],
        terminated_all=terminated_all,
    )

    exploration_map = None
    if build_map:
        exploration_map = mapping.build_map(
            [r.logged_points for r in robots],
            [r.path_history for r in robots],
            world, cfg.map_cell_size, cfg.robot_radius,
        )

    return RunResult(metrics=metrics, map=exploration_map, robots=robots,
                     events=events, trajectory_rows=trajectory_rows,
                     world=world, cfg=cfg)


def path_redundancy(path: Sequence[Vec2], cell_size: float) -> int:
    """Count of path points whose grid cell was already visited earlier.

    The path is discretized onto a square grid of side ``cell_size``; the
    first visit to a cell is free, every later point in that cell counts one.
    """
    if cell_size <= 0:
        raise ValueError(f"cell_size must be positive, got {cell_size}")
    seen: set[tuple[int, int]] = set()
    revisits = 0
    for p in path:
        cell = (math.floor(p.x / cell_size), math.floor(p.y / cell_size))
        if cell in seen:
            revisits += 1
        else:
            seen.add(cell)
    return revisits


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_trajectory_csv(result: RunResult, path) -> None:
    """Per-step poses: step, time_s, robot_id, x, y, phase, goal_x, goal_y."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "time_s", "robot_id", "x", "y", "phase",
                         "goal_x", "goal_y"])
        for row in result.trajectory_rows:
            writer.writerow([_fmt(v) for v in row])


def write_event_csv(result: RunResult, path) -> None:
    """Event log: step, time_s, kind, robot_ids, x, y, source."""
    dt = result.cfg.dt
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "time_s", "kind", "robot_ids", "x", "y", "source"])
        for ev in result.events:
            ids = str(ev.robot_id) if ev.robot_b is None else f"{ev.robot_id};{ev.robot_b}"
            x = ev.point.x if ev.point is not None else None
            y = ev.point.y if ev.point is not None else None
            writer.writerow([ev.step, _fmt(ev.step * dt), ev.kind, ids,
                             _fmt(x), _fmt(y), ev.source or ""])
