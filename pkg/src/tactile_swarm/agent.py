"""One robot's decision kernel: candidate goals, local costs, goal selection.

The robot samples P candidate goals evenly on a circle of radius r around
itself, scores each with a weighted sum of a crowding term (inverse distance
to the neighbors it can currently hear) and a redundancy term (inverse
distance, or inverse squared distance, to its own logged contact points), and
commits to the cheapest candidate. Everything here is a pure function of its
arguments; the engine owns all mutation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyCandidates, InvalidParam
from .geometry import Vec2

__all__ = [
    "SINGULARITY_FLOOR",
    "CostWeights",
    "CandidateGoalSet",
    "generate_candidates",
    "collision_cost",
    "redundancy_cost",
    "total_cost",
    "evaluate_costs",
    "select_goal",
    "velocity_toward",
]

# Distances are clamped to this floor before inversion: a candidate goal can
# coincide with a logged point or a neighbor, where the raw cost is undefined.
SINGULARITY_FLOOR = 1e-6


@dataclass(frozen=True)
class CostWeights:
    """Weights trading crowding avoidance (beta) against revisit avoidance (gamma)."""

    beta: float
    gamma: float
    redundancy_exponent: int = 2

    def __post_init__(self):
        if self.beta < 0 or self.gamma < 0 or self.beta + self.gamma <= 0:
            raise InvalidParam(
                f"weights must be nonnegative with a positive sum, got "
                f"beta={self.beta}, gamma={self.gamma}"
            )
        if self.redundancy_exponent not in (1, 2):
            raise InvalidParam(
                f"redundancy exponent must be 1 or 2, got {self.redundancy_exponent}"
            )


@dataclass(frozen=True)
class CandidateGoalSet:
    """P goals on a circle around ``center``, ordered by increasing angle 2*pi*k/P."""

    goals: np.ndarray  # (P, 2), read-only
    center: Vec2
    radius: float

    @property
    def count(self) -> int:
        return self.goals.shape[0]

    def goal(self, index: int) -> Vec2:
        return Vec2(float(self.goals[index, 0]), float(self.goals[index, 1]))


def _as_points(points: Iterable) -> np.ndarray:
    """Coerce a sequence of Vec2 / (x, y) pairs / an (n, 2) array to (n, 2) floats."""
    if isinstance(points, np.ndarray):
        arr = points.astype(float, copy=False)
        return arr.reshape(0, 2) if arr.size == 0 else arr
    rows = [(p.x, p.y) if isinstance(p, Vec2) else (p[0], p[1]) for p in points]
    if not rows:
        return np.empty((0, 2))
    return np.asarray(rows, dtype=float)


def generate_candidates(center: Vec2, radius: float, count: int) -> CandidateGoalSet:
    """Sample ``count`` goals evenly on the circle of ``radius`` around ``center``.

    Goal k sits at angle 2*pi*k/count for k = 1..count. No feasibility
    filtering happens here: goals may fall outside the workspace or inside
    obstacles, and the engine deals with that through contact handling.
    """
    if radius <= 0:
        raise InvalidParam(f"candidate radius must be positive, got {radius}")
    if count < 1:
        raise InvalidParam(f"candidate count must be at least 1, got {count}")
    angles = 2.0 * np.pi * np.arange(1, count + 1) / count
    goals = np.empty((count, 2))
    goals[:, 0] = center.x + radius * np.cos(angles)
    goals[:, 1] = center.y + radius * np.sin(angles)
    goals.setflags(write=False)
    return CandidateGoalSet(goals=goals, center=center, radius=radius)


def _accumulate_inverse_distances(goals: np.ndarray, points: np.ndarray,
                                  exponent: int) -> np.ndarray:
    """Sum of 1 / max(||g - p||, floor)^exponent over points, per goal.

    Accumulates point by point so each goal's sum is evaluated in the same
    sequential order as a scalar loop would use; this keeps results exactly
    reproducible regardless of array sizes.
    """
    acc = np.zeros(goals.shape[0])
    for px, py in points:
        dx = goals[:, 0] - px
        dy = goals[:, 1] - py
        d = np.maximum(np.sqrt(dx * dx + dy * dy), SINGULARITY_FLOOR)
        if exponent == 2:
            acc += 1.0 / (d * d)
        else:
            acc += 1.0 / d
    return acc


def collision_cost(goal: Vec2, neighbor_positions: Sequence) -> float:
    """Crowding penalty: sum of inverse distances from the goal to each neighbor."""
    points = _as_points(neighbor_positions)
    goals = np.array([[goal.x, goal.y]])
    return float(_accumulate_inverse_distances(goals, points, exponent=1)[0])


def redundancy_cost(goal: Vec2, logged_points: Sequence, exponent: int = 2) -> float:
    """Revisit penalty: sum of inverse (squared) distances to logged contact points."""
    if exponent not in (1, 2):
        raise InvalidParam(f"redundancy exponent must be 1 or 2, got {exponent}")
    points = _as_points(logged_points)
    goals = np.array([[goal.x, goal.y]])
    return float(_accumulate_inverse_distances(goals, points, exponent=exponent)[0])


def total_cost(goal: Vec2, neighbor_positions: Sequence, logged_points: Sequence,
               weights: CostWeights) -> float:
    """Weighted cost beta * crowding + gamma * redundancy for a single goal."""
    return (weights.beta * collision_cost(goal, neighbor_positions)
            + weights.gamma * redundancy_cost(goal, logged_points,
                                              weights.redundancy_exponent))


def evaluate_costs(candidates: CandidateGoalSet, neighbor_positions: Sequence,
                   logged_points: Sequence, weights: CostWeights) -> np.ndarray:
    """Total cost of every candidate goal, as a length-P array."""
    goals = candidates.goals
    crowding = _accumulate_inverse_distances(goals, _as_points(neighbor_positions), 1)
    revisit = _accumulate_inverse_distances(goals, _as_points(logged_points),
                                            weights.redundancy_exponent)
    return weights.beta * crowding + weights.gamma * revisit


def select_goal(candidates: CandidateGoalSet, neighbor_positions: Sequence,
                logged_points: Sequence, weights: CostWeights) -> tuple[Vec2, int]:
    """Pick the candidate with minimal total cost.

    Ties are broken toward the lowest candidate index so replays are
    deterministic. Returns the chosen goal and its index into
    ``candidates.goals``.
    """
    if candidates.count == 0:
        raise EmptyCandidates("no candidate goals to select from")
    costs = evaluate_costs(candidates, neighbor_positions, logged_points, weights)
    index = int(np.argmin(costs))  # argmin returns the first minimum
    return candidates.goal(index), index


def velocity_toward(position: Vec2, goal: Vec2, speed: float,
                    reached_tolerance: float = 0.01) -> Vec2:
    """Constant-speed velocity pointing from position to goal.

    Returns the zero vector once the goal is within ``reached_tolerance``,
    since exact arrival never happens under discrete stepping.
    """
    if speed <= 0:
        raise InvalidParam(f"speed must be positive, got {speed}")
    dx = goal.x - position.x
    dy = goal.y - position.y
    dist = math.hypot(dx, dy)
    if dist < reached_tolerance:
        return Vec2(0.0, 0.0)
    return Vec2(speed * dx / dist, speed * dy / dist)
