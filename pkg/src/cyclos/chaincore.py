"""Integer chain complexes in dimensions 0-2 and their cycle machinery.

The complex stores an ordered vertex list, oriented edges (parallel edges
allowed), and optional oriented triangles. Boundary matrices are built over
the integers; projections and class reduction run in exact rational
arithmetic so closure checks (``boundary1(z) == 0``) are matrix-exact, never
approximate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Mapping, Sequence

from . import ratlin
from .errors import ClosureError, CyclosError, MalformedChainError

VertexId = Hashable


@dataclass(frozen=True)
class Chain1:
    """Sparse 1-chain: edge index -> rational coefficient, zeros dropped."""

    coefficients: tuple[tuple[int, Fraction], ...]

    @classmethod
    def from_dict(cls, coeffs: Mapping[int, Fraction | int]) -> "Chain1":
        items = tuple(
            (int(idx), Fraction(val)) for idx, val in sorted(coeffs.items()) if Fraction(val) != 0
        )
        return cls(items)

    def as_dict(self) -> dict[int, Fraction]:
        return dict(self.coefficients)

    def __add__(self, other: "Chain1") -> "Chain1":
        merged = self.as_dict()
        for idx, val in other.coefficients:
            merged[idx] = merged.get(idx, Fraction(0)) + val
        return Chain1.from_dict(merged)

    def __neg__(self) -> "Chain1":
        return Chain1.from_dict({idx: -val for idx, val in self.coefficients})

    def __sub__(self, other: "Chain1") -> "Chain1":
        return self + (-other)

    def scale(self, factor: Fraction | int) -> "Chain1":
        factor = Fraction(factor)
        return Chain1.from_dict({idx: factor * val for idx, val in self.coefficients})

    def is_zero(self) -> bool:
        return not self.coefficients

    def to_json_obj(self) -> dict[str, str]:
        return {str(idx): _fraction_to_str(val) for idx, val in self.coefficients}

    @classmethod
    def from_json_obj(cls, obj: Mapping[str, str]) -> "Chain1":
        return cls.from_dict({int(k): Fraction(str(v)) for k, v in obj.items()})


@dataclass(frozen=True)
class HomologyClass1:
    """Cycle-basis coordinates reduced modulo the image of the 2-boundary."""

    coordinates: tuple[Fraction, ...]

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coordinates)

    def __neg__(self) -> "HomologyClass1":
        return HomologyClass1(tuple(-c for c in self.coordinates))


def _fraction_to_str(f: Fraction) -> str:
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


class ChainComplex:
    """Vertices, oriented edges, optional triangles, and boundary matrices.

    Immutable after construction. Boundary matrices are derived from the
    simplex lists; ``boundary2`` may be overridden for diagnostics (that is
    the only way to build a complex violating d(d(.)) = 0, which
    :func:`verify_dd_zero` then reports).
    """

    def __init__(
        self,
        vertices: Sequence[VertexId],
        edges: Sequence[tuple[VertexId, VertexId]] = (),
        triangles: Sequence[tuple[VertexId, VertexId, VertexId]] = (),
        *,
        boundary2_override: Sequence[Sequence[int]] | None = None,
    ):
        self.vertices = tuple(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise CyclosError("duplicate vertex ids")
        self.edges = tuple((t, h) for t, h in edges)
        self.triangles = tuple((a, b, c) for a, b, c in triangles)
        self._vertex_index = {v: i for i, v in enumerate(self.vertices)}

        for tail, head in self.edges:
            if tail not in self._vertex_index or head not in self._vertex_index:
                raise CyclosError(f"edge ({tail!r}, {head!r}) references unknown vertex")

        self.boundary1 = self._build_boundary1()
        if boundary2_override is not None:
            self.boundary2 = [list(map(int, row)) for row in boundary2_override]
            if len(self.boundary2) != len(self.edges):
                raise CyclosError("boundary2 override has wrong row count")
        else:
            self.boundary2 = self._build_boundary2()

        self._forest_edges, self._parents = self._spanning_forest()
        self._nontree_edges = [i for i in range(len(self.edges)) if i not in self._forest_edges]

    # -- construction helpers -------------------------------------------------

    def _build_boundary1(self) -> list[list[int]]:
        mat = [[0] * len(self.edges) for _ in self.vertices]
        for j, (tail, head) in enumerate(self.edges):
            mat[self._vertex_index[head]][j] += 1
            mat[self._vertex_index[tail]][j] -= 1
        return mat

    def _resolve_side(self, tail: VertexId, head: VertexId) -> tuple[int, int]:
        """Lowest-index listed edge matching (tail, head) up to orientation."""
        for j, (t, h) in enumerate(self.edges):
            if (t, h) == (tail, head):
                return j, 1
            if (t, h) == (head, tail):
                return j, -1
        raise CyclosError(f"triangle side ({tail!r}, {head!r}) has no matching edge")

    def _build_boundary2(self) -> list[list[int]]:
        mat = [[0] * len(self.triangles) for _ in self.edges]
        for j, (a, b, c) in enumerate(self.triangles):
            for tail, head in ((a, b), (b, c), (c, a)):
                edge_idx, sign = self._resolve_side(tail, head)
                mat[edge_idx][j] += sign
        return mat

    def _spanning_forest(self) -> tuple[set[int], dict[VertexId, tuple[VertexId, int, int]]]:
        """Forest built by scanning edges in index order (lexicographic minimum).

        ``parents[v] = (parent vertex, edge index, direction)`` where direction
        is +1 when the stored edge points parent -> v.
        """
        root: dict[VertexId, VertexId] = {v: v for v in self.vertices}

        def find(v: VertexId) -> VertexId:
            while root[v] != v:
                root[v] = root[root[v]]
                v = root[v]
            return v

        forest: set[int] = set()
        adjacency: dict[VertexId, list[tuple[VertexId, int, int]]] = {v: [] for v in self.vertices}
        for j, (tail, head) in enumerate(self.edges):
            rt, rh = find(tail), find(head)
            if rt != rh:
                root[rt] = rh
                forest.add(j)
                adjacency[tail].append((head, j, 1))
                adjacency[head].append((tail, j, -1))

        parents: dict[VertexId, tuple[VertexId, int, int]] = {}
        seen: set[VertexId] = set()
        for start in self.vertices:
            if start in seen:
                continue
            seen.add(start)
            stack = [start]
            while stack:
                v = stack.pop()
                for (w, j, direction) in adjacency[v]:
                    if w not in seen:
                        seen.add(w)
                        parents[w] = (v, j, direction)
                        stack.append(w)
        return forest, parents

    # -- basic queries ---------------------------------------------------------

    def vertex_index(self, v: VertexId) -> int:
        return self._vertex_index[v]

    def n_components(self) -> int:
        return len(self.vertices) - len(self._forest_edges)

    def _tree_path_chain(self, start: VertexId, goal: VertexId) -> dict[int, int]:
        """Signed tree-edge coefficients of the forest path start -> goal."""

        def path_to_root(v: VertexId) -> list[tuple[VertexId, int, int]]:
            out = []
            while v in self._parents:
                parent, j, direction = self._parents[v]
                out.append((v, j, direction))
                v = parent
            return out

        up_start = path_to_root(start)
        up_goal = path_to_root(goal)
        # Find the meeting vertex: walk both trails as vertex sequences.
        trail_start = [start]
        for v, _, _ in up_start:
            trail_start.append(self._parents[v][0])
        trail_goal = [goal]
        for v, _, _ in up_goal:
            trail_goal.append(self._parents[v][0])
        goal_positions = {v: i for i, v in enumerate(trail_goal)}
        meet_idx_start = next(i for i, v in enumerate(trail_start) if v in goal_positions)
        meet = trail_start[meet_idx_start]
        coeffs: dict[int, int] = {}
        # start -> meet: each hop v -> parent traverses edge j against `direction`.
        for v, j, direction in up_start[:meet_idx_start]:
            coeffs[j] = coeffs.get(j, 0) - direction
        # meet -> goal: reverse of goal -> meet.
        for v, j, direction in up_goal[: goal_positions[meet]]:
            coeffs[j] = coeffs.get(j, 0) + direction
        return coeffs

    def fundamental_cycle(self, edge_index: int) -> Chain1:
        """Cycle with coefficient +1 on the given non-tree edge."""
        tail, head = self.edges[edge_index]
        coeffs: dict[int, Fraction] = {edge_index: Fraction(1)}
        for j, c in self._tree_path_chain(head, tail).items():
            coeffs[j] = coeffs.get(j, Fraction(0)) + c
        return Chain1.from_dict(coeffs)

    # -- serialization ---------------------------------------------------------

    def to_json_obj(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [list(e) for e in self.edges],
            "triangles": [list(t) for t in self.triangles],
        }

    @classmethod
    def from_json_obj(cls, obj: Mapping) -> "ChainComplex":
        return cls(
            obj["vertices"],
            [tuple(e) for e in obj.get("edges", [])],
            [tuple(t) for t in obj.get("triangles", [])],
        )


# -- operations ------------------------------------------------------------------


def boundary1(chain: Chain1, complex_: ChainComplex) -> dict[VertexId, Fraction]:
    """Boundary of a 1-chain: sum of coeff * (head - tail) per edge."""
    out: dict[VertexId, Fraction] = {}
    for idx, coeff in chain.coefficients:
        if idx < 0 or idx >= len(complex_.edges):
            raise MalformedChainError(f"edge index {idx} out of range")
        tail, head = complex_.edges[idx]
        out[head] = out.get(head, Fraction(0)) + coeff
        out[tail] = out.get(tail, Fraction(0)) - coeff
    return {v: c for v, c in out.items() if c != 0}


def verify_dd_zero(complex_: ChainComplex) -> bool:
    """True iff boundary1 . boundary2 is the zero matrix (exact)."""
    if not complex_.triangles or not complex_.edges:
        return True
    product = ratlin.mat_mul(complex_.boundary1, complex_.boundary2)
    return ratlin.is_zero_matrix(product)


def cycle_space_basis(complex_: ChainComplex) -> list[Chain1]:
    """Fundamental cycles of the lexicographic-minimum spanning forest."""
    return [complex_.fundamental_cycle(j) for j in complex_._nontree_edges]


def project_to_cycles(chain: Chain1, complex_: ChainComplex) -> Chain1:
    """Orthogonal projection onto ker(boundary1), exact rationals.

    Solves the normal equations of least-squares approximation by cycle-basis
    combinations; idempotent, and the output always has zero boundary.
    """
    for idx, _ in chain.coefficients:
        if idx < 0 or idx >= len(complex_.edges):
            raise MalformedChainError(f"edge index {idx} out of range")
    basis = cycle_space_basis(complex_)
    if not basis:
        return Chain1.from_dict({})
    n_edges = len(complex_.edges)
    basis_cols = [[Fraction(0)] * len(basis) for _ in range(n_edges)]
    for b_idx, cyc in enumerate(basis):
        for e_idx, coeff in cyc.coefficients:
            basis_cols[e_idx][b_idx] = coeff
    c_vec = [Fraction(0)] * n_edges
    for idx, coeff in chain.coefficients:
        c_vec[idx] = coeff
    bt = ratlin.transpose(basis_cols)
    gram = ratlin.mat_mul(bt, basis_cols)
    rhs = ratlin.mat_vec(bt, c_vec)
    coords = ratlin.solve_gaussian(gram, rhs)
    out: dict[int, Fraction] = {}
    for b_idx, x in enumerate(coords):
        if x == 0:
            continue
        for e_idx, coeff in basis[b_idx].coefficients:
            out[e_idx] = out.get(e_idx, Fraction(0)) + x * coeff
    return Chain1.from_dict(out)


def _cycle_coordinates(chain: Chain1, complex_: ChainComplex) -> list[Fraction]:
    """Coordinates in the fundamental-cycle basis.

    Each fundamental cycle carries exactly one non-tree edge, so a cycle's
    coordinates are its coefficients on the non-tree edges.
    """
    lookup = chain.as_dict()
    return [lookup.get(j, Fraction(0)) for j in complex_._nontree_edges]


def _boundary2_reducer(complex_: ChainComplex):
    """RREF rows/pivots spanning the boundary2 image in cycle coordinates."""
    cols = []
    for t_idx in range(len(complex_.triangles)):
        cols.append([Fraction(complex_.boundary2[j][t_idx]) for j in complex_._nontree_edges])
    if not cols:
        return [], []
    return ratlin.column_space_rows(ratlin.transpose(cols))


def homology_class(cycle: Chain1, complex_: ChainComplex) -> HomologyClass1:
    bnd = boundary1(cycle, complex_)
    if bnd:
        raise ClosureError(f"chain is not a cycle; boundary supported on {sorted(map(str, bnd))}")
    coords = _cycle_coordinates(cycle, complex_)
    rows, pivots = _boundary2_reducer(complex_)
    reduced = ratlin.reduce_mod_rows(coords, rows, pivots) if rows else coords
    return HomologyClass1(tuple(reduced))


def homologous(z1: Chain1, z2: Chain1, complex_: ChainComplex) -> bool:
    return homology_class(z1, complex_) == homology_class(z2, complex_)


def homology_basis_cycles(complex_: ChainComplex) -> list[Chain1]:
    """Cycles whose classes form a basis of H1 over the rationals."""
    rows, pivots = _boundary2_reducer(complex_)
    pivot_set = set(pivots)
    return [
        complex_.fundamental_cycle(j)
        for pos, j in enumerate(complex_._nontree_edges)
        if pos not in pivot_set
    ]


def betti(complex_: ChainComplex, dim: int) -> int:
    if dim == 0:
        return complex_.n_components()
    if dim == 1:
        ker_dim = len(complex_._nontree_edges)
        rank_b2 = ratlin.rank(complex_.boundary2) if complex_.triangles else 0
        return ker_dim - rank_b2
    raise CyclosError(f"unsupported dimension {dim}; only 0 and 1 are computed")
