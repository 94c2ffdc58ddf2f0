"""Collaborative map construction from logged contact points and trajectories.

Per-robot point sets are merged into one global set, rasterized into a
tri-state grid (obstacle / free / unexplored), and rendered as a smooth
density map by splatting a compact triangular kernel at every point. Grids
can be exported as binary PGM images or CSV.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import Vec2
from .world import World

__all__ = [
    "UNEXPLORED",
    "FREE",
    "OBSTACLE",
    "ExplorationMap",
    "aggregate",
    "grid_shape",
    "classify_grid",
    "interpolate_map",
    "build_map",
    "export_grid",
    "load_grid_csv",
    "write_points_csv",
    "load_points_csv",
]

# tri-state cell values
UNEXPLORED = 0
FREE = 1
OBSTACLE = 2

_STATE_NAMES = {UNEXPLORED: "Unexplored", FREE: "Free", OBSTACLE: "Obstacle"}
_NAME_STATES = {v: k for k, v in _STATE_NAMES.items()}
_PGM_LEVELS = {UNEXPLORED: 0, FREE: 128, OBSTACLE: 255}


@dataclass
class ExplorationMap:
    """Per-robot point sets, their union, and the rasterized tri-state grid.

    Grid row iy, column ix covers the square [origin + (ix, iy) * cell_size,
    origin + (ix + 1, iy + 1) * cell_size): row 0 is the minimum-y edge of
    the workspace.
    """

    local_sets: list[list[Vec2]]
    global_set: list[Vec2]
    grid: np.ndarray  # uint8, shape (ny, nx)
    cell_size: float
    origin: Vec2


def aggregate(local_sets: Sequence[Sequence[Vec2]]) -> list[Vec2]:
    """Union of the per-robot point sets, in (robot, log order), exact
    duplicates removed."""
    seen: set[tuple[float, float]] = set()
    merged: list[Vec2] = []
    for points in local_sets:
        for p in points:
            key = (p.x, p.y)
            if key not in seen:
                seen.add(key)
                merged.append(p)
    return merged


def grid_shape(world: World, cell_size: float) -> tuple[int, int]:
    """(ny, nx) so the grid covers the workspace bounds exactly."""
    if cell_size <= 0:
        raise ValueError(f"cell_size must be positive, got {cell_size}")
    nx = max(1, math.ceil(world.bounds.width / cell_size - 1e-9))
    ny = max(1, math.ceil(world.bounds.height / cell_size - 1e-9))
    return ny, nx


def _cell_index(value: float, origin: float, cell_size: float, n: int) -> int:
    idx = math.floor((value - origin) / cell_size)
    return min(max(idx, 0), n - 1)


def classify_grid(trajectories: Sequence[Sequence[Vec2]], global_points: Sequence[Vec2],
                  world: World, cell_size: float, robot_radius: float) -> np.ndarray:
    """Tri-state grid: swept by a robot disc -> free, holds a contact point ->
    obstacle (winning over free), everything else unexplored."""
    ny, nx = grid_shape(world, cell_size)
    grid = np.full((ny, nx), UNEXPLORED, dtype=np.uint8)
    ox, oy = world.bounds.min.x, world.bounds.min.y

    # free: every cell whose square intersects the robot disc at some pose
    edges_x = ox + cell_size * np.arange(nx + 1)
    edges_y = oy + cell_size * np.arange(ny + 1)
    for path in trajectories:
        for p in path:
            ix_lo = _cell_index(p.x - robot_radius, ox, cell_size, nx)
            ix_hi = _cell_index(p.x + robot_radius, ox, cell_size, nx)
            iy_lo = _cell_index(p.y - robot_radius, oy, cell_size, ny)
            iy_hi = _cell_index(p.y + robot_radius, oy, cell_size, ny)
            # distance from p to each candidate cell rectangle
            cx_lo = edges_x[ix_lo:ix_hi + 1]
            cy_lo = edges_y[iy_lo:iy_hi + 1]
            dx = np.maximum(np.maximum(cx_lo - p.x, p.x - (cx_lo + cell_size)), 0.0)
            dy = np.maximum(np.maximum(cy_lo - p.y, p.y - (cy_lo + cell_size)), 0.0)
            inside = dx[None, :] ** 2 + dy[:, None] ** 2 <= robot_radius ** 2
            window = grid[iy_lo:iy_hi + 1, ix_lo:ix_hi + 1]
            window[inside] = FREE

    for p in global_points:
        ix = _cell_index(p.x, ox, cell_size, nx)
        iy = _cell_index(p.y, oy, cell_size, ny)
        grid[iy, ix] = OBSTACLE

    return grid


def interpolate_map(global_points: Sequence[Vec2], world: World, cell_size: float,
                    kernel_radius: float) -> np.ndarray:
    """Density grid in [0, 1] from splatting max(0, 1 - d / kernel_radius) at
    every point and normalizing by the grid maximum."""
    if kernel_radius < cell_size:
        raise ValueError("kernel_radius must be at least cell_size")
    ny, nx = grid_shape(world, cell_size)
    grid = np.zeros((ny, nx))
    ox, oy = world.bounds.min.x, world.bounds.min.y
    centers_x = ox + cell_size * (np.arange(nx) + 0.5)
    centers_y = oy + cell_size * (np.arange(ny) + 0.5)

    for p in global_points:
        ix_lo = _cell_index(p.x - kernel_radius, ox, cell_size, nx)
        ix_hi = _cell_index(p.x + kernel_radius, ox, cell_size, nx)
        iy_lo = _cell_index(p.y - kernel_radius, oy, cell_size, ny)
        iy_hi = _cell_index(p.y + kernel_radius, oy, cell_size, ny)
        dx = centers_x[ix_lo:ix_hi + 1] - p.x
        dy = centers_y[iy_lo:iy_hi + 1] - p.y
        d = np.sqrt(dx[None, :] ** 2 + dy[:, None] ** 2)
        grid[iy_lo:iy_hi + 1, ix_lo:ix_hi + 1] += np.maximum(0.0, 1.0 - d / kernel_radius)

    peak = grid.max()
    if peak > 0.0:
        grid /= peak
    return grid


def build_map(local_sets: Sequence[Sequence[Vec2]],
              trajectories: Sequence[Sequence[Vec2]], world: World,
              cell_size: float, robot_radius: float) -> ExplorationMap:
    """Aggregate local point sets and rasterize the tri-state grid."""
    merged = aggregate(local_sets)
    grid = classify_grid(trajectories, merged, world, cell_size, robot_radius)
    return ExplorationMap(
        local_sets=[list(points) for points in local_sets],
        global_set=merged,
        grid=grid,
        cell_size=cell_size,
        origin=world.bounds.min,
    )


def export_grid(grid: np.ndarray, path, format: str = "pgm") -> None:
    """Write a grid to disk.

    PGM: binary P5, one byte per cell; tri-state grids map unexplored/free/
    obstacle to 0/128/255, density grids scale [0, 1] to [0, 255]. CSV:
    row-major, state names for tri-state grids, float densities otherwise.
    """
    fmt = format.lower()
    tri_state = grid.dtype == np.uint8
    if fmt == "pgm":
        if tri_state:
            levels = np.zeros_like(grid)
            for state, level in _PGM_LEVELS.items():
                levels[grid == state] = level
        else:
            levels = np.rint(np.clip(grid, 0.0, 1.0) * 255).astype(np.uint8)
        with open(path, "wb") as fh:
            ny, nx = grid.shape
            fh.write(f"P5\n{nx} {ny}\n255\n".encode("ascii"))
            fh.write(levels.tobytes())
    elif fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            for row in grid:
                if tri_state:
                    writer.writerow([_STATE_NAMES[int(v)] for v in row])
                else:
                    writer.writerow([repr(float(v)) for v in row])
    else:
        raise ValueError(f"unknown grid format {format!r}, expected 'pgm' or 'csv'")


def load_grid_csv(path) -> np.ndarray:
    """Read a grid written by ``export_grid(..., format='csv')``."""
    rows = []
    tri_state = None
    with open(path, newline="") as fh:
        for record in csv.reader(fh):
            if not record:
                continue
            if tri_state is None:
                tri_state = record[0] in _NAME_STATES
            if tri_state:
                rows.append([_NAME_STATES[v] for v in record])
            else:
                rows.append([float(v) for v in record])
    return np.asarray(rows, dtype=np.uint8 if tri_state else float)


def write_points_csv(local_sets: Sequence[Sequence[Vec2]], path) -> None:
    """Point cloud export: robot_id, seq, x, y in log order."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["robot_id", "seq", "x", "y"])
        for rid, points in enumerate(local_sets):
            for seq, p in enumerate(points):
                writer.writerow([rid, seq, repr(p.x), repr(p.y)])


def load_points_csv(path) -> list[list[Vec2]]:
    """Read a point cloud written by ``write_points_csv``."""
    sets: dict[int, list[Vec2]] = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        for row in reader:
            sets.setdefault(int(row["robot_id"]), []).append(
                Vec2(float(row["x"]), float(row["y"])))
    if not sets:
        return []
    return [sets.get(rid, []) for rid in range(max(sets) + 1)]
