"""Cycle-accumulated generalized Hough voting with gaze re-registration.

Votes are binned in one canonical order (sorted by descriptor, then
quantized re-registered position), which makes accumulator equality under
glimpse/feature permutations bit-exact rather than tolerance-based. Votes
landing off-grid go to an overflow bucket instead of being dropped silently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, NoPeakError, PreconditionError, TableError
from .persist import Bar, Barcode

GAZE_CLOSURE_TOL = 1e-9


@dataclass(frozen=True)
class Feature:
    position: tuple[float, float]  # pixels
    orientation: float  # radians
    descriptor: int


@dataclass(frozen=True)
class GazeTransform:
    """Element of SE(2): rotation then translation."""

    rotation: float = 0.0
    translation: tuple[float, float] = (0.0, 0.0)

    def apply(self, point: tuple[float, float]) -> tuple[float, float]:
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        x, y = point
        return (c * x - s * y + self.translation[0], s * x + c * y + self.translation[1])

    def apply_feature(self, f: Feature) -> Feature:
        return Feature(self.apply(f.position), f.orientation + self.rotation, f.descriptor)

    def compose(self, other: "GazeTransform") -> "GazeTransform":
        """self after other (matrix product self . other)."""
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        tx, ty = other.translation
        return GazeTransform(
            self.rotation + other.rotation,
            (c * tx - s * ty + self.translation[0], s * tx + c * ty + self.translation[1]),
        )

    def inverse(self) -> "GazeTransform":
        c, s = math.cos(self.rotation), math.sin(self.rotation)
        tx, ty = self.translation
        return GazeTransform(-self.rotation, (-(c * tx + s * ty), -(-s * tx + c * ty)))

    def is_identity(self, tol: float = GAZE_CLOSURE_TOL) -> bool:
        rot = (self.rotation + math.pi) % (2 * math.pi) - math.pi
        return abs(rot) <= tol and math.hypot(*self.translation) <= tol


@dataclass(frozen=True)
class ModelTable:
    """Descriptor id -> offset from feature to reference point (feature frame)."""

    offsets: Mapping[int, tuple[float, float]]

    def vote_point(self, f: Feature) -> tuple[float, float]:
        if f.descriptor not in self.offsets:
            raise TableError(f"descriptor {f.descriptor} missing from model table")
        ox, oy = self.offsets[f.descriptor]
        c, s = math.cos(f.orientation), math.sin(f.orientation)
        return (f.position[0] + c * ox - s * oy, f.position[1] + s * ox + c * oy)


@dataclass(frozen=True)
class AccumulatorConfig:
    extent: tuple[float, float, float, float]  # xmin, xmax, ymin, ymax
    shape: tuple[int, int]  # nx, ny
    kernel: str = "delta"  # delta | gaussian
    bandwidth: float = 1.0  # gaussian sigma, in parameter-space units

    def __post_init__(self):
        nx, ny = self.shape
        xmin, xmax, ymin, ymax = self.extent
        if nx < 1 or ny < 1 or xmax <= xmin or ymax <= ymin:
            raise ConfigError("invalid accumulator grid")
        if self.kernel not in ("delta", "gaussian"):
            raise ConfigError(f"unknown kernel {self.kernel!r}")
        if self.kernel == "gaussian" and self.bandwidth <= 0:
            raise ConfigError("gaussian kernel needs a positive bandwidth")

    def cell_of(self, point: tuple[float, float]) -> tuple[int, int] | None:
        xmin, xmax, ymin, ymax = self.extent
        nx, ny = self.shape
        ix = math.floor((point[0] - xmin) / (xmax - xmin) * nx)
        iy = math.floor((point[1] - ymin) / (ymax - ymin) * ny)
        if 0 <= ix < nx and 0 <= iy < ny:
            return ix, iy
        return None

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        xmin, xmax, ymin, ymax = self.extent
        nx, ny = self.shape
        return (
            xmin + (ix + 0.5) * (xmax - xmin) / nx,
            ymin + (iy + 0.5) * (ymax - ymin) / ny,
        )


@dataclass(frozen=True)
class Accumulator:
    config: AccumulatorConfig
    grid: np.ndarray  # shape (ny, nx)
    overflow_count: int
    overflow_weight: float

    def serialize_grid(self) -> bytes:
        return self.grid.tobytes()


@dataclass(frozen=True)
class PeakResult:
    point: tuple[float, float]
    value: float
    tied: bool


def accumulate(
    glimpses: Sequence[tuple[GazeTransform, Sequence[Feature]]],
    table: ModelTable,
    config: AccumulatorConfig,
    re_register: bool = True,
) -> Accumulator:
    """Pool votes over glimpses into one parameter-space grid.

    With `re_register`, each glimpse's features are mapped through the
    inverse gaze transform before voting, removing gaze as a nuisance.
    """
    votes = []
    for gaze, features in glimpses:
        inv = gaze.inverse() if re_register else None
        for f in features:
            registered = inv.apply_feature(f) if inv is not None else f
            point = table.vote_point(registered)
            cell = config.cell_of(point)
            quantized = cell if cell is not None else (-1, -1)
            votes.append((f.descriptor, quantized[0], quantized[1], point[0], point[1]))
    votes.sort()

    nx, ny = config.shape
    grid = np.zeros((ny, nx))
    overflow_count = 0
    overflow_weight = 0.0
    if config.kernel == "delta":
        for _, ix, iy, _, _ in votes:
            if ix < 0:
                overflow_count += 1
                overflow_weight += 1.0
            else:
                grid[iy, ix] += 1.0
    else:
        xmin, xmax, ymin, ymax = config.extent
        cell_w = (xmax - xmin) / nx
        cell_h = (ymax - ymin) / ny
        reach_x = math.ceil(3.0 * config.bandwidth / cell_w)
        reach_y = math.ceil(3.0 * config.bandwidth / cell_h)
        for _, ix, iy, px, py in votes:
            if ix < 0:
                overflow_count += 1
                overflow_weight += 1.0
                continue
            for jy in range(max(0, iy - reach_y), min(ny, iy + reach_y + 1)):
                for jx in range(max(0, ix - reach_x), min(nx, ix + reach_x + 1)):
                    cx, cy = config.cell_center(jx, jy)
                    dist_sq = (cx - px) ** 2 + (cy - py) ** 2
                    if dist_sq <= (3.0 * config.bandwidth) ** 2:
                        grid[jy, jx] += math.exp(-0.5 * dist_sq / config.bandwidth**2)
    return Accumulator(config, grid, overflow_count, overflow_weight)


def argmax_peak(acc: Accumulator) -> PeakResult:
    """Cell center of the maximum; ties resolve to the lowest linear index."""
    if not np.any(acc.grid > 0):
        raise NoPeakError("accumulator holds no votes")
    flat_idx = int(np.argmax(acc.grid))
    iy, ix = np.unravel_index(flat_idx, acc.grid.shape)
    value = float(acc.grid[iy, ix])
    tied = int(np.count_nonzero(acc.grid == value)) > 1
    return PeakResult(acc.config.cell_center(int(ix), int(iy)), value, tied)


def saccade_invariance_audit(
    scene: Sequence[Feature],
    gaze_paths: Sequence[Sequence[GazeTransform]],
    table: ModelTable,
    config: AccumulatorConfig,
    re_register: bool = True,
) -> dict:
    """Compare Hough peaks across scanpaths over one scene.

    Each path is a sequence of gaze states; the features observed at state g
    are the scene features moved by g. Paths that are open while
    re-registration is off violate the precondition and are reported (and
    excluded) rather than aborting the audit.
    """
    entries = []
    peaks = []
    for idx, path in enumerate(gaze_paths):
        composed = GazeTransform()
        for g in path:
            composed = composed.compose(g)
        closed = composed.is_identity()
        if not closed and not re_register:
            entries.append({
                "path": idx,
                "error": "open gaze path without re-registration (nuisance not removed)",
            })
            continue
        glimpses = [(g, [g.apply_feature(f) for f in scene]) for g in path]
        acc = accumulate(glimpses, table, config, re_register=re_register)
        peak = argmax_peak(acc)
        cell = config.cell_of(peak.point)
        entries.append({"path": idx, "peak": list(peak.point), "cell": list(cell),
                        "value": peak.value})
        peaks.append(cell)
    agree = bool(peaks) and all(
        abs(c[0] - peaks[0][0]) <= 1 and abs(c[1] - peaks[0][1]) <= 1 for c in peaks
    )
    return {
        "pass": agree and len(peaks) == len(gaze_paths),
        "peaks_agree_within_one_cell": agree,
        "paths": entries,
    }


def peak_persistence(acc: Accumulator, thresholds: Sequence[float]) -> Barcode:
    """H0 barcode of the superlevel-set filtration of the vote field.

    Thresholds must descend. Bars are recorded on the negated threshold axis
    so the shared barcode convention (birth <= death along the filtration)
    applies: a component born at peak height h and merged at saddle s yields
    the bar (-h, -s); persistence lengths are peak - saddle either way.
    """
    if any(b >= a for a, b in zip(thresholds, thresholds[1:])):
        raise PreconditionError("thresholds must be strictly descending")
    if not thresholds:
        return Barcode(())
    ny, nx = acc.grid.shape
    parent = {}
    birth = {}

    def find(c):
        while parent[c] != c:
            parent[c] = parent[parent[c]]
            c = parent[c]
        return c

    bars = []
    active = set()
    for tau in thresholds:
        newly = [
            (iy, ix)
            for iy in range(ny)
            for ix in range(nx)
            if (iy, ix) not in active and acc.grid[iy, ix] >= tau
        ]
        for cell in newly:
            parent[cell] = cell
            birth[cell] = tau
            active.add(cell)
        # union pass after all activations at this threshold
        for cell in sorted(active):
            iy, ix = cell
            for ny_, nx_ in ((iy - 1, ix), (iy + 1, ix), (iy, ix - 1), (iy, ix + 1)):
                if (ny_, nx_) in active:
                    ra, rb = find(cell), find((ny_, nx_))
                    if ra == rb:
                        continue
                    elder, younger = sorted(
                        (ra, rb), key=lambda r: (-birth[r], r)
                    )
                    bars.append(Bar(0, -birth[younger], -tau))
                    parent[younger] = elder
    roots = {find(c) for c in active}
    for root in sorted(roots, key=lambda r: (-birth[r], r)):
        bars.append(Bar(0, -birth[root], math.inf))
    bars.sort(key=lambda b: (b.birth, b.death))
    return Barcode(tuple(bars))
