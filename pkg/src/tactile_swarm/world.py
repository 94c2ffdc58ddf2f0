"""The bounded workspace, its obstacles, and the tactile contact query.

A robot is a disc; it "feels" a surface when the surface comes within
``robot_radius + tactile_range`` of its center. Walls count as surfaces by
default, so border touches are logged like obstacle touches.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import OutOfBounds
from .geometry import Rect, Shape, Vec2

__all__ = ["World", "ContactQueryResult", "contact_query", "clamp_to_bounds"]


@dataclass(frozen=True)
class ContactQueryResult:
    """Outcome of one tactile query.

    ``contact_point`` is the nearest point of the touched surface and is only
    meaningful when ``in_contact`` is true. ``source`` is "obstacle" or
    "wall"; ``obstacle_index`` indexes into ``World.obstacles`` for the former.
    """

    in_contact: bool
    contact_point: Vec2 | None = None
    source: str | None = None
    obstacle_index: int | None = None


@dataclass(frozen=True)
class World:
    """Rectangular workspace with a list of convex obstacles.

    Immutable after construction; all queries are pure.
    """

    bounds: Rect
    obstacles: tuple[Shape, ...] = field(default_factory=tuple)
    walls_are_tactile: bool = True

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))

    def interior_wall_distance(self, p: Vec2) -> float:
        """Distance from an interior point to the nearest wall."""
        return -self.bounds.signed_distance(p)


def contact_query(robot_center: Vec2, robot_radius: float, tactile_range: float,
                  world: World) -> ContactQueryResult:
    """Report whether a robot disc is touching any surface, and where.

    Fires when the nearest obstacle boundary (or wall, when walls are
    tactile) is within ``robot_radius + tactile_range`` of the center. The
    closest qualifying surface wins; ties go to the lowest obstacle index,
    with the wall last.

    Raises OutOfBounds if the center is not inside the workspace, since the
    engine is supposed to keep robots clamped inside at all times.
    """
    if world.bounds.signed_distance(robot_center) > 0.0:
        raise OutOfBounds(f"robot center {robot_center} outside workspace bounds")

    reach = robot_radius + tactile_range
    best_dist = None
    best: ContactQueryResult | None = None

    for idx, obstacle in enumerate(world.obstacles):
        d = obstacle.signed_distance(robot_center)
        if d <= reach and (best_dist is None or d < best_dist):
            best_dist = d
            best = ContactQueryResult(
                in_contact=True,
                contact_point=obstacle.closest_boundary_point(robot_center),
                source="obstacle",
                obstacle_index=idx,
            )

    if world.walls_are_tactile:
        d = world.interior_wall_distance(robot_center)
        if d <= reach and (best_dist is None or d < best_dist):
            best = ContactQueryResult(
                in_contact=True,
                contact_point=world.bounds.closest_boundary_point(robot_center),
                source="wall",
            )

    return best if best is not None else ContactQueryResult(in_contact=False)


def clamp_to_bounds(p: Vec2, robot_radius: float, world: World) -> Vec2:
    """Nearest point to p at which a disc of the given radius fits inside."""
    lo_x = world.bounds.min.x + robot_radius
    hi_x = world.bounds.max.x - robot_radius
    lo_y = world.bounds.min.y + robot_radius
    hi_y = world.bounds.max.y - robot_radius
    return Vec2(min(max(p.x, lo_x), hi_x), min(max(p.y, lo_y), hi_y))
