"""Exact 2D primitives: points, convex shapes, and signed-distance queries.

All lengths are meters in double precision. Every type here is an immutable
value and every function is pure, so they are safe to share across threads.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "Vec2",
    "Circle",
    "Rect",
    "ConvexPolygon",
    "Shape",
    "euclidean",
    "distance_point_to_shape",
]


@dataclass(frozen=True, slots=True)
class Vec2:
    """A 2D point or displacement. Components must be finite."""

    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"Vec2 components must be finite, got ({self.x}, {self.y})")

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


def euclidean(a: Vec2, b: Vec2) -> float:
    """Euclidean distance between two points."""
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass(frozen=True, slots=True)
class Circle:
    center: Vec2
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"circle radius must be positive, got {self.radius}")

    def signed_distance(self, p: Vec2) -> float:
        """Distance from p to the boundary; negative iff p is strictly inside."""
        return euclidean(p, self.center) - self.radius

    def closest_boundary_point(self, p: Vec2) -> Vec2:
        d = euclidean(p, self.center)
        if d == 0.0:
            # degenerate: p at the center, pick the +x boundary point
            return Vec2(self.center.x + self.radius, self.center.y)
        s = self.radius / d
        return Vec2(self.center.x + (p.x - self.center.x) * s,
                    self.center.y + (p.y - self.center.y) * s)

    def contains(self, p: Vec2) -> bool:
        return euclidean(p, self.center) < self.radius


@dataclass(frozen=True, slots=True)
class Rect:
    """Axis-aligned rectangle given by its min and max corners."""

    min: Vec2
    max: Vec2

    def __post_init__(self):
        if not (self.min.x < self.max.x and self.min.y < self.max.y):
            raise ValueError("rect requires min < max componentwise")

    @property
    def width(self) -> float:
        return self.max.x - self.min.x

    @property
    def height(self) -> float:
        return self.max.y - self.min.y

    def signed_distance(self, p: Vec2) -> float:
        # dx/dy are the per-axis distances outside the slab (negative inside)
        dx = max(self.min.x - p.x, p.x - self.max.x)
        dy = max(self.min.y - p.y, p.y - self.max.y)
        if dx > 0.0 or dy > 0.0:
            return math.hypot(max(dx, 0.0), max(dy, 0.0))
        return max(dx, dy)

    def closest_boundary_point(self, p: Vec2) -> Vec2:
        inside = self.min.x < p.x < self.max.x and self.min.y < p.y < self.max.y
        if not inside:
            return Vec2(min(max(p.x, self.min.x), self.max.x),
                        min(max(p.y, self.min.y), self.max.y))
        # inside: project onto the nearest side, ties resolved in a fixed order
        gaps = (
            (p.x - self.min.x, Vec2(self.min.x, p.y)),
            (self.max.x - p.x, Vec2(self.max.x, p.y)),
            (p.y - self.min.y, Vec2(p.x, self.min.y)),
            (self.max.y - p.y, Vec2(p.x, self.max.y)),
        )
        return min(gaps, key=lambda g: g[0])[1]

    def contains(self, p: Vec2) -> bool:
        return self.min.x < p.x < self.max.x and self.min.y < p.y < self.max.y


def _cross(ox: float, oy: float, ax: float, ay: float, bx: float, by: float) -> float:
    return (ax - ox) * (by - oy) - (ay - oy) * (bx - ox)


@dataclass(frozen=True)
class ConvexPolygon:
    """Strictly convex polygon with counter-clockwise vertex order."""

    vertices: tuple[Vec2, ...]

    def __post_init__(self):
        verts = tuple(self.vertices)
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        if n < 3:
            raise ValueError("polygon needs at least 3 vertices")
        for i in range(n):
            a, b, c = verts[i], verts[(i + 1) % n], verts[(i + 2) % n]
            if _cross(a.x, a.y, b.x, b.y, c.x, c.y) <= 0.0:
                raise ValueError("polygon must be strictly convex and counter-clockwise")

    def contains(self, p: Vec2) -> bool:
        verts = self.vertices
        n = len(verts)
        for i in range(n):
            a, b = verts[i], verts[(i + 1) % n]
            if _cross(a.x, a.y, b.x, b.y, p.x, p.y) <= 0.0:
                return False
        return True

    def _closest_on_edges(self, p: Vec2) -> tuple[float, Vec2]:
        best_d = math.inf
        best_q = self.vertices[0]
        n = len(self.vertices)
        for i in range(n):
            a, b = self.vertices[i], self.vertices[(i + 1) % n]
            abx, aby = b.x - a.x, b.y - a.y
            t = ((p.x - a.x) * abx + (p.y - a.y) * aby) / (abx * abx + aby * aby)
            t = min(max(t, 0.0), 1.0)
            q = Vec2(a.x + t * abx, a.y + t * aby)
            d = euclidean(p, q)
            if d < best_d:
                best_d, best_q = d, q
        return best_d, best_q

    def signed_distance(self, p: Vec2) -> float:
        d, _ = self._closest_on_edges(p)
        return -d if self.contains(p) else d

    def closest_boundary_point(self, p: Vec2) -> Vec2:
        _, q = self._closest_on_edges(p)
        return q


Shape = Circle | Rect | ConvexPolygon


def distance_point_to_shape(p: Vec2, shape: Shape) -> float:
    """Signed Euclidean distance from p to the boundary of shape.

    Negative iff p lies strictly inside, zero on the boundary.
    """
    return shape.signed_distance(p)
