"""Range-limited position exchange between robots.

Communication is idealized: zero latency, zero loss, positions only. A robot
hears exactly the peers within ``r_comm`` of it (inclusive) at the instant a
snapshot is taken; snapshots for all robots are taken simultaneously at the
start of each engine step, which keeps runs order-independent.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import UnknownObserver
from .geometry import Vec2, euclidean

__all__ = ["NeighborSnapshot", "neighbor_set", "is_fully_connected"]


@dataclass(frozen=True)
class NeighborSnapshot:
    """The peers one robot could hear at a given step, sorted by id."""

    observer_id: int
    neighbor_positions: tuple[tuple[int, Vec2], ...]
    taken_at_step: int = 0

    def positions(self) -> list[Vec2]:
        return [p for _, p in self.neighbor_positions]

    def ids(self) -> list[int]:
        return [i for i, _ in self.neighbor_positions]


def neighbor_set(all_positions: Sequence[tuple[int, Vec2]], observer_id: int,
                 r_comm: float, taken_at_step: int = 0) -> NeighborSnapshot:
    """Robots within r_comm of the observer (boundary inclusive), excluding itself."""
    table = dict(all_positions)
    if observer_id not in table:
        raise UnknownObserver(f"observer {observer_id} not in position table")
    origin = table[observer_id]
    neighbors = tuple(
        (rid, pos)
        for rid, pos in sorted(table.items())
        if rid != observer_id and euclidean(origin, pos) <= r_comm
    )
    return NeighborSnapshot(observer_id=observer_id, neighbor_positions=neighbors,
                            taken_at_step=taken_at_step)


def is_fully_connected(all_positions: Sequence[tuple[int, Vec2]], r_comm: float) -> bool:
    """True iff the r_comm disk graph over the robots has one connected component.

    Checked by traversal, not pairwise completeness: a chain of robots each
    within range of the next counts as connected.
    """
    ids = [rid for rid, _ in all_positions]
    if not ids:
        raise ValueError("need at least one robot")
    table = dict(all_positions)
    seen = {ids[0]}
    frontier = [ids[0]]
    while frontier:
        current = frontier.pop()
        for rid, pos in table.items():
            if rid not in seen and euclidean(table[current], pos) <= r_comm:
                seen.add(rid)
                frontier.append(rid)
    return len(seen) == len(table)
