"""Planar homing: winding vectors around disk obstacles and order invariance.

The homology class of a homing loop in a disk-punctured plane is its integer
winding vector. Windings are summed signed subtended angles per segment
(atan2 arithmetic); a residual check guards against under-sampled loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import ClosureError, CompositionError, CyclosError, FeasibilityError, SamplingError

Point = tuple[float, float]
DEFAULT_ENDPOINT_TOL = 1e-6
RESIDUAL_LIMIT = 0.01


@dataclass(frozen=True)
class Disk:
    center: Point
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise CyclosError("obstacle radius must be positive")


@dataclass(frozen=True)
class Workspace:
    obstacles: tuple[Disk, ...]
    base: Point

    def __post_init__(self):
        for i, a in enumerate(self.obstacles):
            for b in self.obstacles[i + 1:]:
                if math.dist(a.center, b.center) <= a.radius + b.radius:
                    raise CyclosError("obstacles must be pairwise disjoint")
        for disk in self.obstacles:
            if math.dist(self.base, disk.center) < disk.radius:
                raise CyclosError("base point lies inside an obstacle")

    def to_json_obj(self) -> dict:
        return {
            "obstacles": [[d.center[0], d.center[1], d.radius] for d in self.obstacles],
            "base": list(self.base),
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "Workspace":
        return cls(
            tuple(Disk((x, y), r) for x, y, r in obj["obstacles"]),
            tuple(obj["base"]),
        )


@dataclass(frozen=True)
class Move:
    """Polyline path through the free space."""

    path: tuple[Point, ...]

    def __post_init__(self):
        if len(self.path) < 2:
            raise CyclosError("a move needs at least two points")

    @property
    def start(self) -> Point:
        return self.path[0]

    @property
    def end(self) -> Point:
        return self.path[-1]


@dataclass(frozen=True)
class WindingVector:
    windings: tuple[int, ...]

    def __add__(self, other: "WindingVector") -> "WindingVector":
        return WindingVector(tuple(a + b for a, b in zip(self.windings, other.windings)))

    def __neg__(self) -> "WindingVector":
        return WindingVector(tuple(-w for w in self.windings))


def _segment_clears_disk(p: Point, q: Point, disk: Disk) -> bool:
    """Segment pq stays outside the open disk."""
    px, py = p
    qx, qy = q
    cx, cy = disk.center
    dx, dy = qx - px, qy - py
    seg_len_sq = dx * dx + dy * dy
    if seg_len_sq == 0:
        dist = math.dist(p, disk.center)
    else:
        t = max(0.0, min(1.0, ((cx - px) * dx + (cy - py) * dy) / seg_len_sq))
        dist = math.dist((px + t * dx, py + t * dy), disk.center)
    return dist >= disk.radius - 1e-12


def check_feasible(path: Sequence[Point], ws: Workspace) -> None:
    for p, q in zip(path, path[1:]):
        for idx, disk in enumerate(ws.obstacles):
            if not _segment_clears_disk(p, q, disk):
                raise FeasibilityError(
                    f"segment {p} -> {q} crosses obstacle {idx} at {disk.center}"
                )


def winding_vector(
    loop: Sequence[Point],
    ws: Workspace,
    tol: float = DEFAULT_ENDPOINT_TOL,
) -> WindingVector:
    """Integer windings of a closed loop around every obstacle."""
    if len(loop) < 3:
        raise CyclosError("loop needs at least three points")
    if math.dist(loop[0], loop[-1]) > tol:
        raise ClosureError(
            f"loop endpoints differ by {math.dist(loop[0], loop[-1]):.3g} m"
        )
    check_feasible(loop, ws)
    windings = []
    for disk in ws.obstacles:
        cx, cy = disk.center
        total = 0.0
        for (px, py), (qx, qy) in zip(loop, loop[1:]):
            ax, ay = px - cx, py - cy
            bx, by = qx - cx, qy - cy
            cross = ax * by - ay * bx
            dot = ax * bx + ay * by
            total += math.atan2(cross, dot)
        turns = total / (2.0 * math.pi)
        nearest = round(turns)
        if abs(turns - nearest) >= RESIDUAL_LIMIT:
            raise SamplingError(
                f"winding residual {abs(turns - nearest):.3g} around {disk.center}; "
                "loop sampled too coarsely or not closed"
            )
        windings.append(int(nearest))
    return WindingVector(tuple(windings))


def compose_moves(
    sequence: Sequence[Move],
    ws: Workspace,
    tol: float = DEFAULT_ENDPOINT_TOL,
) -> list[Point]:
    """Concatenate moves into a homing loop anchored at the base point."""
    if not sequence:
        raise CompositionError("no moves to compose")
    if math.dist(sequence[0].start, ws.base) > tol:
        raise CompositionError("first move does not start at the base point")
    path: list[Point] = list(sequence[0].path)
    for idx, move in enumerate(sequence[1:], start=1):
        if math.dist(path[-1], move.start) > tol:
            raise CompositionError(
                f"move {idx} starts {math.dist(path[-1], move.start):.3g} m away from "
                "the previous endpoint"
            )
        path.extend(move.path[1:])
    if math.dist(path[-1], ws.base) > tol:
        raise ClosureError("composed path does not return to the base point")
    check_feasible(path, ws)
    return path


def order_invariance_check(
    moveset: Sequence[Move],
    orderings: Sequence[Sequence[int]],
    ws: Workspace,
    tol: float = DEFAULT_ENDPOINT_TOL,
) -> tuple[bool, dict]:
    """Compare winding vectors across move orderings.

    Invalid orderings (composition or closure failures) are reported per
    ordering and excluded; the check passes iff every valid ordering yields
    one winding vector.
    """
    results = []
    vectors = []
    for ordering in orderings:
        try:
            loop = compose_moves([moveset[i] for i in ordering], ws, tol)
            vec = winding_vector(loop, ws, tol)
            vectors.append(vec)
            results.append({"ordering": list(ordering), "windings": list(vec.windings)})
        except CyclosError as err:
            results.append({"ordering": list(ordering), "error": str(err)})
    ok = bool(vectors) and all(v == vectors[0] for v in vectors)
    return ok, {"pass": ok, "orderings": results}


def product_class(perception: WindingVector, action: WindingVector) -> WindingVector:
    """Direct-sum class of a perception loop and an action loop."""
    return WindingVector(perception.windings + action.windings)
