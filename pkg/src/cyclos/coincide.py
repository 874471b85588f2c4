"""Coincidence multigraphs from spike trains and their closed cycle content.

A spike pair (i, t), (j, t') with t < t' and circular phase distance at most
delta contributes one oriented edge i -> j. Projecting the edge aggregate
onto the cycle space cancels everything that shows up in the boundary, so
what survives is exactly the closed, reproducible part of the train.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from . import chaincore
from .chaincore import Chain1, ChainComplex, HomologyClass1
from .errors import CyclosError, PreconditionError, WindowError
from .persist import Barcode, compute_barcode, window_filtration
from .phasecode import Oscillator, circular_distance, wrap_time

DEFAULT_MULTIPLICITY_CAP = 16


@dataclass(frozen=True)
class SpikeTrain:
    """Timestamped spikes over `neurons` units, normalized to time order."""

    neurons: int
    spikes: tuple[tuple[int, float], ...]

    def __init__(self, neurons: int, spikes: Sequence[tuple[int, float]]):
        if neurons < 0:
            raise CyclosError("neuron count must be non-negative")
        normalized = []
        for neuron, t in spikes:
            if not (0 <= neuron < neurons):
                raise CyclosError(f"spike neuron {neuron} outside 0..{neurons - 1}")
            if not math.isfinite(t):
                raise CyclosError("spike times must be finite")
            normalized.append((int(neuron), float(t)))
        normalized.sort(key=lambda s: (s[1], s[0]))
        object.__setattr__(self, "neurons", neurons)
        object.__setattr__(self, "spikes", tuple(normalized))

    def to_json_obj(self) -> dict:
        return {"neurons": self.neurons, "spikes": [[n, t] for n, t in self.spikes]}

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "SpikeTrain":
        return cls(int(obj["neurons"]), [(int(n), float(t)) for n, t in obj["spikes"]])


@dataclass(frozen=True)
class CoincidenceWindow:
    delta: float  # radians

    def __post_init__(self):
        if not (0.0 < self.delta < math.pi):
            raise WindowError(f"coincidence window must lie in (0, pi), got {self.delta}")


@dataclass(frozen=True)
class CoincidenceResult:
    graph: ChainComplex
    aggregate: Chain1
    closed: Chain1
    cls: HomologyClass1
    multiplicity_overflow: dict[tuple[int, int], int] = field(default_factory=dict)


def _coincident_pairs(train: SpikeTrain, osc: Oscillator, window: CoincidenceWindow,
                      delta: float | None = None) -> list[tuple[int, int, float, float]]:
    """All (i, j, t, t') pairs with t < t' within the phase window, time order."""
    limit = window.delta if delta is None else delta
    phases = [(neuron, t, wrap_time(t, osc)) for neuron, t in train.spikes]
    pairs = []
    for a in range(len(phases)):
        i, t, phase_a = phases[a]
        for b in range(a + 1, len(phases)):
            j, t_next, phase_b = phases[b]
            if t_next <= t or i == j:
                continue  # simultaneous spikes stay unordered; self-pairs carry no relation
            if circular_distance(phase_a, phase_b) <= limit:
                pairs.append((i, j, t, t_next))
    return pairs


def _cap_pairs(pairs, cap):
    kept, overflow = [], {}
    counts: dict[tuple[int, int], int] = {}
    for i, j, t, t2 in pairs:
        key = (i, j)
        counts[key] = counts.get(key, 0) + 1
        if counts[key] <= cap:
            kept.append((i, j, t, t2))
        else:
            overflow[key] = overflow.get(key, 0) + 1
    return kept, overflow


def build_coincidence_graph(
    train: SpikeTrain,
    osc: Oscillator,
    window: CoincidenceWindow,
    multiplicity_cap: int = DEFAULT_MULTIPLICITY_CAP,
) -> ChainComplex:
    kept, _ = _cap_pairs(_coincident_pairs(train, osc, window), multiplicity_cap)
    return ChainComplex(list(range(train.neurons)), [(i, j) for i, j, _, _ in kept])


def closed_part(
    train: SpikeTrain,
    osc: Oscillator,
    window: CoincidenceWindow,
    multiplicity_cap: int = DEFAULT_MULTIPLICITY_CAP,
) -> CoincidenceResult:
    kept, overflow = _cap_pairs(_coincident_pairs(train, osc, window), multiplicity_cap)
    graph = ChainComplex(list(range(train.neurons)), [(i, j) for i, j, _, _ in kept])
    aggregate = Chain1.from_dict({idx: 1 for idx in range(len(graph.edges))})
    closed = chaincore.project_to_cycles(aggregate, graph)
    cls = chaincore.homology_class(closed, graph)
    return CoincidenceResult(graph, aggregate, closed, cls, overflow)


def _union_complex(graphs: Sequence[ChainComplex]) -> tuple[ChainComplex, list[dict[int, int]]]:
    """Shared multigraph matching edges by (tail, head) and occurrence.

    Returns the union complex and, per input graph, the map from its edge
    indices to union edge indices.
    """
    max_counts: dict[tuple, int] = {}
    for g in graphs:
        counts: dict[tuple, int] = {}
        for e in g.edges:
            counts[e] = counts.get(e, 0) + 1
        for e, c in counts.items():
            max_counts[e] = max(max_counts.get(e, 0), c)
    union_edges = []
    slot: dict[tuple[tuple, int], int] = {}
    for e in sorted(max_counts):
        for occurrence in range(max_counts[e]):
            slot[(e, occurrence)] = len(union_edges)
            union_edges.append(e)
    vertices = sorted({v for g in graphs for v in g.vertices})
    union = ChainComplex(vertices, union_edges)
    mappings = []
    for g in graphs:
        seen: dict[tuple, int] = {}
        mapping = {}
        for idx, e in enumerate(g.edges):
            occurrence = seen.get(e, 0)
            seen[e] = occurrence + 1
            mapping[idx] = slot[(e, occurrence)]
        mappings.append(mapping)
    return union, mappings


def trial_invariance(
    trials: Sequence[SpikeTrain],
    osc: Oscillator,
    window: CoincidenceWindow,
    epsilon: float,
    multiplicity_cap: int = DEFAULT_MULTIPLICITY_CAP,
) -> tuple[bool, dict]:
    """Check that all trials' closed parts are homologous.

    Cross-trial edges are matched by neuron ids (and by occurrence order for
    parallel edges); the report flags pairs whose multiplicities differ across
    trials, since the matching of parallels is then a convention.
    """
    if epsilon >= window.delta:
        raise PreconditionError(f"epsilon {epsilon} must be below the window {window.delta}")
    if not trials:
        raise PreconditionError("need at least one trial")
    neuron_counts = {t.neurons for t in trials}
    if len(neuron_counts) != 1:
        raise PreconditionError("trials must share one neuron set")

    results = [closed_part(t, osc, window, multiplicity_cap) for t in trials]
    union, mappings = _union_complex([r.graph for r in results])
    classes = []
    for result, mapping in zip(results, mappings):
        embedded = Chain1.from_dict(
            {mapping[idx]: coeff for idx, coeff in result.closed.coefficients}
        )
        classes.append(chaincore.homology_class(embedded, union))

    ambiguous_pairs = sorted(
        {
            pair
            for a in results
            for b in results
            for pair in _multiplicity_mismatches(a.graph, b.graph)
        }
    )
    invariant = all(c == classes[0] for c in classes)
    report = {
        "invariant": invariant,
        "epsilon": epsilon,
        "delta": window.delta,
        "per_trial_class": [[str(c) for c in cls.coordinates] for cls in classes],
        "ambiguous_parallel_pairs": [list(p) for p in ambiguous_pairs],
        "multiplicity_overflow": [
            {f"{i}->{j}": n for (i, j), n in r.multiplicity_overflow.items()} for r in results
        ],
    }
    return invariant, report


def _multiplicity_mismatches(a: ChainComplex, b: ChainComplex):
    counts_a: dict[tuple, int] = {}
    counts_b: dict[tuple, int] = {}
    for e in a.edges:
        counts_a[e] = counts_a.get(e, 0) + 1
    for e in b.edges:
        counts_b[e] = counts_b.get(e, 0) + 1
    for e in set(counts_a) | set(counts_b):
        if counts_a.get(e, 0) != counts_b.get(e, 0) and max(counts_a.get(e, 0), counts_b.get(e, 0)) > 1:
            yield e


def coincidence_persistence(
    train: SpikeTrain,
    osc: Oscillator,
    deltas: Sequence[float],
    multiplicity_cap: int = DEFAULT_MULTIPLICITY_CAP,
) -> Barcode:
    """Barcode of the nested coincidence graphs over a growing window.

    The multiplicity cap is applied once at the widest window so that the
    kept edge set is monotone in delta.
    """
    if not deltas:
        raise CyclosError("need at least one window value")
    if any(b <= a for a, b in zip(deltas, deltas[1:])):
        raise CyclosError("window values must be strictly ascending")
    for d in deltas:
        CoincidenceWindow(d)  # range validation
    widest = CoincidenceWindow(deltas[-1])
    all_pairs, _ = _cap_pairs(_coincident_pairs(train, osc, widest), multiplicity_cap)
    phases = {}
    graphs = {}
    for delta in deltas:
        edges = []
        for i, j, t, t2 in all_pairs:
            key = (t, i, t2, j)
            if key not in phases:
                phases[key] = circular_distance(wrap_time(t, osc), wrap_time(t2, osc))
            if phases[key] <= delta:
                edges.append((i, j))
        graphs[delta] = ChainComplex(list(range(train.neurons)), edges)
    return compute_barcode(window_filtration(graphs))
