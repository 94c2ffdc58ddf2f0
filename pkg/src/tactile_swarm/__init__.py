"""Deterministic 2D multi-robot exploration with contact-based mapping.

Robots explore a bounded arena by touching things: each robot steers toward
the cheapest of P candidate goals sampled on a circle around it, where cost
trades off crowding (inverse distance to the neighbors currently in
communication range) against redundancy (inverse distance to its own logged
contact points). Touch points accumulate into local maps that merge into one
global obstacle map; a robot parks forever once it has logged its quota.
"""

from .agent import (CandidateGoalSet, CostWeights, collision_cost,
                    generate_candidates, redundancy_cost, select_goal,
                    total_cost, velocity_toward)
from .comms import NeighborSnapshot, is_fully_connected, neighbor_set
from .engine import (ContactEvent, Phase, RobotState, RunMetrics, RunResult,
                     SimConfig, SimState, path_redundancy, run, step)
from .errors import (EmptyCandidates, InvalidParam, InvalidScenario,
                     OutOfBounds, ParseError, TactileSwarmError,
                     UnknownObserver)
from .geometry import (Circle, ConvexPolygon, Rect, Vec2,
                       distance_point_to_shape, euclidean)
from .harness import (Scenario, SweepSpec, load_scenario, load_sweep_spec,
                      run_scenario, run_sweep)
from .mapping import (ExplorationMap, aggregate, classify_grid, export_grid,
                      interpolate_map)
from .world import ContactQueryResult, World, clamp_to_bounds, contact_query

__version__ = "0.1.0"

__all__ = [
    "Vec2", "Circle", "Rect", "ConvexPolygon", "euclidean",
    "distance_point_to_shape",
    "World", "ContactQueryResult", "contact_query", "clamp_to_bounds",
    "CostWeights", "CandidateGoalSet", "generate_candidates", "collision_cost",
    "redundancy_cost", "total_cost", "select_goal", "velocity_toward",
    "NeighborSnapshot", "neighbor_set", "is_fully_connected",
    "SimConfig", "RobotState", "ContactEvent", "RunMetrics", "RunResult",
    "SimState", "Phase", "step", "run", "path_redundancy",
    "ExplorationMap", "aggregate", "classify_grid", "interpolate_map",
    "export_grid",
    "Scenario", "SweepSpec", "load_scenario", "load_sweep_spec",
    "run_scenario", "run_sweep",
    "TactileSwarmError", "InvalidParam", "OutOfBounds", "EmptyCandidates",
    "UnknownObserver", "InvalidScenario", "ParseError",
]
