"""Grid-cell phase lattices, the theta-gated coincidence functional, and
place-field emergence.

Two evaluation modes share one kernel family:

* :func:`coincidence_functional` integrates the phase-locked input along a
  trajectory over one oscillator period (plain trapezoid average, which keeps
  segment additivity exact and makes never-aligned boxcar segments integrate
  to exactly zero).
* :func:`place_field_map` evaluates stationary positions through a theta
  gate, a boxcar window of the same width anchored at the oscillator's zero
  phase. Only positions whose grid phases align with the gate (and hence
  with each other) score highly, which is what localizes fields at
  multi-lattice alignment points; the peak value matches the aligned
  trajectory value (sum of weights) * delta / pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ClosureError, ConfigError, CyclosError
from .phasecode import Oscillator, circular_distance, winding_number, wrap_time

TWO_PI = 2.0 * math.pi
GATE_CENTER = 0.0  # absolute oscillator phase anchoring the theta gate


@dataclass(frozen=True)
class GridCell:
    wavevector: tuple[float, float]  # rad / meter
    offset: float = 0.0

    def __post_init__(self):
        if math.hypot(*self.wavevector) <= 0:
            raise CyclosError("grid cell wavevector must be nonzero")


@dataclass(frozen=True)
class PlaceCellConfig:
    weights: tuple[float, ...]
    threshold: float
    kernel: str = "boxcar"  # boxcar | von_mises
    delta: float = math.pi / 8

    def __post_init__(self):
        if any(w < 0 for w in self.weights):
            raise ConfigError("weights must be non-negative")
        if not (0 < self.delta <= math.pi / 4):
            raise ConfigError("kernel width must satisfy 0 < delta <= pi/4")
        if self.kernel not in ("boxcar", "von_mises"):
            raise ConfigError(f"unknown kernel {self.kernel!r}")


@dataclass(frozen=True)
class Trajectory2D:
    samples: tuple[tuple[float, tuple[float, float]], ...]

    def __post_init__(self):
        times = [t for t, _ in self.samples]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise CyclosError("trajectory times must be strictly increasing")

    @property
    def t_start(self) -> float:
        return self.samples[0][0]

    @property
    def t_end(self) -> float:
        return self.samples[-1][0]

    def position(self, t: float) -> tuple[float, float]:
        samples = self.samples
        if not (self.t_start <= t <= self.t_end):
            raise CyclosError(f"time {t} outside trajectory span")
        lo, hi = 0, len(samples) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if samples[mid][0] <= t:
                lo = mid
            else:
                hi = mid
        t0, (x0, y0) = samples[lo]
        t1, (x1, y1) = samples[hi]
        if t1 == t0:
            return x0, y0
        s = (t - t0) / (t1 - t0)
        return x0 + s * (x1 - x0), y0 + s * (y1 - y0)


def grid_phase(cell: GridCell, x: tuple[float, float]) -> float:
    raw = cell.wavevector[0] * x[0] + cell.wavevector[1] * x[1] + cell.offset
    wrapped = raw - TWO_PI * math.floor(raw / TWO_PI)
    return 0.0 if wrapped >= TWO_PI else wrapped


def kernel_value(cfg: PlaceCellConfig, phase_distance: float) -> float:
    d = abs(phase_distance)
    if cfg.kernel == "boxcar":
        return 1.0 if d <= cfg.delta else 0.0
    kappa = math.log(2.0) / (1.0 - math.cos(cfg.delta))  # half max at d = delta
    return math.exp(kappa * (math.cos(d) - 1.0))


def _input_at(cfg: PlaceCellConfig, cells: Sequence[GridCell], osc: Oscillator,
              t: float, x: tuple[float, float]) -> float:
    theta = wrap_time(t, osc)
    total = 0.0
    for w, cell in zip(cfg.weights, cells):
        total += w * kernel_value(cfg, circular_distance(theta, grid_phase(cell, x)))
    return total


def _segment_integral(cfg, cells, osc, traj, t0, t1) -> float:
    steps = max(1, math.ceil((t1 - t0) / (osc.period / 256.0)))
    h = (t1 - t0) / steps
    total = 0.0
    prev = _input_at(cfg, cells, osc, t0, traj.position(t0))
    for i in range(1, steps + 1):
        t = t0 + i * h
        current = _input_at(cfg, cells, osc, t, traj.position(t))
        total += 0.5 * (prev + current) * h
        prev = current
    return total


def coincidence_functional(
    cfg: PlaceCellConfig,
    cells: Sequence[GridCell],
    traj: Trajectory2D,
    osc: Oscillator,
    t0: float,
) -> float:
    """Average phase-locked input over one oscillator period starting at t0."""
    if len(cfg.weights) != len(cells):
        raise ConfigError("one weight per grid cell required")
    t1 = t0 + osc.period
    if t0 < traj.t_start or t1 > traj.t_end:
        raise CyclosError(
            f"trajectory must cover [{t0}, {t1}], spans [{traj.t_start}, {traj.t_end}]"
        )
    return _segment_integral(cfg, cells, osc, traj, t0, t1) / osc.period


def tour_coincidence_total(
    cfg: PlaceCellConfig,
    cells: Sequence[GridCell],
    tour: Trajectory2D,
    osc: Oscillator,
) -> float:
    """Integrated (not averaged) input over the whole tour.

    Integration runs segment by segment between trajectory samples, so the
    total over a concatenated tour is exactly the sum over its segments.
    """
    if len(cfg.weights) != len(cells):
        raise ConfigError("one weight per grid cell required")
    total = 0.0
    times = [t for t, _ in tour.samples]
    for a, b in zip(times, times[1:]):
        total += _segment_integral(cfg, cells, osc, tour, a, b)
    return total


def _gate_overlap_boxcar(delta: float, phase_dist: float) -> float:
    """Mean of two unit boxcars of half-width delta at circular distance d."""
    return max(0.0, 2.0 * delta - phase_dist) / TWO_PI


def _gated_value(cfg: PlaceCellConfig, cells, x) -> float:
    value = 0.0
    for w, cell in zip(cfg.weights, cells):
        d = circular_distance(grid_phase(cell, x), GATE_CENTER)
        if cfg.kernel == "boxcar":
            value += w * _gate_overlap_boxcar(cfg.delta, d)
        else:
            steps = 512
            acc = 0.0
            for i in range(steps):
                theta = TWO_PI * i / steps
                if circular_distance(theta, GATE_CENTER) <= cfg.delta:
                    acc += kernel_value(cfg, circular_distance(theta, grid_phase(cell, x)))
            value += w * acc / steps
    return value


@dataclass(frozen=True)
class PlaceFieldMap:
    values: np.ndarray  # shape (ny, nx), row 0 at ymin
    mask: np.ndarray  # values >= threshold
    extent: tuple[float, float, float, float]  # xmin, xmax, ymin, ymax
    resolution: tuple[int, int]  # nx, ny

    def cell_center(self, ix: int, iy: int) -> tuple[float, float]:
        xmin, xmax, ymin, ymax = self.extent
        nx, ny = self.resolution
        return (
            xmin + (ix + 0.5) * (xmax - xmin) / nx,
            ymin + (iy + 0.5) * (ymax - ymin) / ny,
        )

    def peak(self) -> tuple[int, int]:
        iy, ix = np.unravel_index(int(np.argmax(self.values)), self.values.shape)
        return int(ix), int(iy)


def place_field_map(
    cfg: PlaceCellConfig,
    cells: Sequence[GridCell],
    osc: Oscillator,
    region: tuple[float, float, float, float],
    resolution: tuple[int, int],
) -> PlaceFieldMap:
    """Theta-gated coincidence values over a grid of stationary positions.

    Positions where many grid phases align with the gate (and hence with one
    another at a shared theta instant) score near (sum of weights) * delta/pi;
    the mask thresholds at cfg.threshold.
    """
    nx, ny = resolution
    if nx < 8 or ny < 8:
        raise ConfigError("resolution must be at least 8x8")
    if len(cfg.weights) != len(cells):
        raise ConfigError("one weight per grid cell required")
    xmin, xmax, ymin, ymax = region
    values = np.zeros((ny, nx))
    for iy in range(ny):
        y = ymin + (iy + 0.5) * (ymax - ymin) / ny
        for ix in range(nx):
            x = xmin + (ix + 0.5) * (xmax - xmin) / nx
            values[iy, ix] = _gated_value(cfg, cells, (x, y))
    return PlaceFieldMap(values, values >= cfg.threshold, region, (nx, ny))


def tour_phase_windings(
    cells: Sequence[GridCell],
    osc: Oscillator,
    tour: Trajectory2D,
    reverse: bool = False,
) -> tuple[int, ...]:
    """Winding class (k_theta, k_1, ..., k_m) of the tour's phase-space lift.

    The sequence of (theta, grid phases) samples traces a loop on the
    (m+1)-torus; its integer windings are the tour's homology data. With
    `reverse` the episode is replayed backwards (sequence reversal), which
    negates every component.
    """
    points = _densified(tour, max_time_step=osc.period / 8.0)
    if reverse:
        points = list(reversed(points))
    theta_seq = [wrap_time(t, osc) for t, _ in points]
    out = [winding_number(theta_seq, closed=True, closure_tol=1e-6)]
    for cell in cells:
        phases = [grid_phase(cell, pos) for _, pos in points]
        out.append(winding_number(phases, closed=True, closure_tol=1e-6))
    return tuple(out)


def tour_invariance(
    cfg: PlaceCellConfig,
    cells: Sequence[GridCell],
    osc: Oscillator,
    tour_a: Trajectory2D,
    tour_b: Trajectory2D,
    reverse_b: bool = False,
    rel_tol: float = 1e-6,
    position_tol: float = 1e-6,
) -> tuple[bool, dict]:
    """Compare two closed tours: integrated totals and phase-winding classes.

    Totals must agree within `rel_tol` relative error and the winding
    vectors of the phase-space lifts must match exactly over the integers.
    `reverse_b` treats tour B as a backward replay of its sample sequence.
    """
    for name, tour in (("A", tour_a), ("B", tour_b)):
        start, end = tour.samples[0][1], tour.samples[-1][1]
        if math.dist(start, end) > position_tol:
            raise ClosureError(f"tour {name} does not close (gap {math.dist(start, end):.3g} m)")
    total_a = tour_coincidence_total(cfg, cells, tour_a, osc)
    total_b = tour_coincidence_total(cfg, cells, tour_b, osc)
    scale = max(abs(total_a), abs(total_b), 1e-30)
    totals_match = abs(total_a - total_b) <= rel_tol * scale

    windings_a = tour_phase_windings(cells, osc, tour_a)
    windings_b = tour_phase_windings(cells, osc, tour_b, reverse=reverse_b)
    windings_match = windings_a == windings_b
    report = {
        "total_a": total_a,
        "total_b": total_b,
        "windings_a": windings_a,
        "windings_b": windings_b,
        "totals_match": totals_match,
        "windings_match": windings_match,
    }
    return totals_match and windings_match, report


def _densified(tour: Trajectory2D, max_step: float = 0.01, max_time_step: float = math.inf):
    """Samples along the tour, subdivided for unambiguous phase unwrapping."""
    points = []
    samples = tour.samples
    for (t0, p0), (t1, p1) in zip(samples, samples[1:]):
        steps = max(1, math.ceil(math.dist(p0, p1) / max_step),
                    math.ceil((t1 - t0) / max_time_step))
        for i in range(steps):
            s = i / steps
            points.append((t0 + s * (t1 - t0), (p0[0] + s * (p1[0] - p0[0]),
                                                p0[1] + s * (p1[1] - p0[1]))))
    points.append(samples[-1])
    return points
