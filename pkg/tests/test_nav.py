"""Winding vectors, move composition, order invariance, product classes.

Winding expectations come from an independent numpy oracle (dense resampling
plus np.unwrap on angles), not from the package's per-segment arithmetic.
"""

import itertools
import math
import random

import numpy as np
import pytest

from cyclos import nav
from cyclos.errors import ClosureError, CompositionError, FeasibilityError, SamplingError
from cyclos.nav import Disk, Move, WindingVector, Workspace


def circle(center, radius, n=48, ccw=True, start_angle=0.0):
    sign = 1.0 if ccw else -1.0
    pts = []
    for i in range(n + 1):
        a = start_angle + sign * 2 * math.pi * i / n
        pts.append((center[0] + radius * math.cos(a), center[1] + radius * math.sin(a)))
    return pts


def winding_oracle(loop, center):
    """Dense-resample the loop and unwrap angles around the center."""
    dense = []
    for p, q in zip(loop, loop[1:]):
        for i in range(32):
            s = i / 32
            dense.append((p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])))
    dense.append(loop[-1])
    arr = np.array(dense) - np.array(center)
    angles = np.unwrap(np.arctan2(arr[:, 1], arr[:, 0]))
    return round((angles[-1] - angles[0]) / (2 * math.pi))


WS2 = Workspace((Disk((0.0, 0.0), 0.5), Disk((4.0, 0.0), 0.5)), base=(2.0, -3.0))


class TestWindingVector:
    def test_ccw_circle_around_first_obstacle(self):
        loop = circle((0.0, 0.0), 1.5)
        vec = nav.winding_vector(loop, WS2)
        assert vec.windings == (1, 0)

    def test_contractible_loop_is_zero(self):
        loop = circle((2.0, 5.0), 0.8)
        assert nav.winding_vector(loop, WS2).windings == (0, 0)

    def test_figure_eight(self):
        # CCW around obstacle 1, then CW around obstacle 2, joined at (2, 0)
        left = circle((0.0, 0.0), 2.0, start_angle=0.0)
        right = circle((4.0, 0.0), 2.0, ccw=False, start_angle=math.pi)
        loop = left + right[1:]
        vec = nav.winding_vector(loop, WS2)
        assert vec.windings == (1, -1)
        assert vec.windings == (
            winding_oracle(loop, (0.0, 0.0)),
            winding_oracle(loop, (4.0, 0.0)),
        )

    def test_open_loop_rejected(self):
        with pytest.raises(ClosureError):
            nav.winding_vector([(0, 2), (1, 2), (1, 3)], WS2)

    def test_obstacle_crossing_rejected(self):
        loop = [(-1.0, 0.0), (1.0, 0.0), (1.0, 1.0), (-1.0, 1.0), (-1.0, 0.0)]
        with pytest.raises(FeasibilityError):
            nav.winding_vector(loop, WS2)

    def test_randomized_against_unwrap_oracle(self):
        rng = random.Random(13)
        for _ in range(40):
            k1 = rng.randint(-2, 2)
            loops = []
            for _ in range(abs(k1)):
                loops.append(circle((0.0, 0.0), 1.2 + rng.random(), ccw=k1 > 0))
            if not loops:
                loops = [circle((2.0, 6.0), 1.0)]
            loop = loops[0]
            for extra in loops[1:]:
                bridge_out = [loop[-1], extra[0]]
                loop = loop + bridge_out[1:] + extra[1:] + [loop[0]]
            # keep the loop away from obstacle 2 and feasible in WS2
            try:
                vec = nav.winding_vector(loop, WS2)
            except (FeasibilityError, SamplingError):
                continue
            assert vec.windings[0] == winding_oracle(loop, (0.0, 0.0))
            assert vec.windings[1] == winding_oracle(loop, (4.0, 0.0))

    def test_additivity_at_shared_basepoint(self):
        def lasso(center, radius=0.9):
            out = [WS2.base, (center[0] + radius, center[1])]
            ring = circle(center, radius, n=24)
            return out + ring[1:] + [(center[0] + radius, center[1]), WS2.base]

        a = lasso((0.0, 0.0))
        b = lasso((4.0, 0.0))
        combined = a + b[1:]
        va = nav.winding_vector(a, WS2)
        vb = nav.winding_vector(b, WS2)
        vc = nav.winding_vector(combined, WS2)
        assert va.windings == (1, 0) and vb.windings == (0, 1)
        assert vc.windings == (va + vb).windings

    def test_reversal_negates(self):
        loop = circle((0.0, 0.0), 1.5)
        vec = nav.winding_vector(loop, WS2)
        rev = nav.winding_vector(list(reversed(loop)), WS2)
        assert rev.windings == (-vec).windings


class TestComposeMoves:
    def test_two_half_loops(self):
        ws = Workspace((Disk((0.0, 0.0), 0.5),), base=(1.5, 0.0))
        upper = Move(tuple(circle((0.0, 0.0), 1.5, n=24)[:13]))  # 0 to pi
        lower = Move(tuple(circle((0.0, 0.0), 1.5, n=24)[12:]))  # pi to 2pi
        loop = nav.compose_moves([upper, lower], ws)
        assert nav.winding_vector(loop, ws).windings == (1,)

    def test_single_closed_move(self):
        ws = Workspace((Disk((0.0, 0.0), 0.5),), base=(1.5, 0.0))
        move = Move(tuple(circle((0.0, 0.0), 1.5)))
        assert nav.compose_moves([move], ws) == list(move.path)

    def test_mismatched_endpoints_rejected(self):
        ws = Workspace((Disk((0.0, 0.0), 0.5),), base=(1.5, 0.0))
        a = Move(((1.5, 0.0), (2.0, 2.0)))
        b = Move(((9.0, 9.0), (1.5, 0.0)))
        with pytest.raises(CompositionError):
            nav.compose_moves([a, b], ws)

    def test_not_returning_home_rejected(self):
        ws = Workspace((Disk((0.0, 0.0), 0.5),), base=(1.5, 0.0))
        a = Move(((1.5, 0.0), (2.0, 2.0)))
        with pytest.raises(ClosureError):
            nav.compose_moves([a], ws)


def commuting_moves(ws):
    """Two closed loops at the base: one around each obstacle."""
    base = ws.base
    def lasso(center, radius=0.9):
        out = [base, (center[0] + radius, center[1])]
        ring = circle(center, radius, n=24, start_angle=0.0)
        return Move(tuple(out + ring[1:] + [(center[0] + radius, center[1]), base]))
    return lasso((0.0, 0.0)), lasso((4.0, 0.0))


class TestOrderInvariance:
    def test_commuting_pair(self):
        a, b = commuting_moves(WS2)
        ok, report = nav.order_invariance_check([a, b], [[0, 1], [1, 0]], WS2)
        assert ok, report

    def test_all_orderings_of_three(self):
        a, b = commuting_moves(WS2)
        # contractible loop anchored at the base point
        c = Move(tuple(circle((WS2.base[0] - 0.4, WS2.base[1]), 0.4)))
        orderings = list(itertools.permutations(range(3)))
        ok, report = nav.order_invariance_check([a, b, c], orderings, WS2)
        assert ok
        assert len(report["orderings"]) == 6
        assert all("windings" in entry for entry in report["orderings"])

    def test_invalid_ordering_reported_not_fatal(self):
        a, b = commuting_moves(WS2)
        open_move = Move(((WS2.base[0], WS2.base[1]), (5.0, 5.0)))
        ok, report = nav.order_invariance_check(
            [a, open_move], [[0], [0, 1]], WS2
        )
        assert ok  # the valid ordering [0] passes; [0, 1] is reported
        errors = [e for e in report["orderings"] if "error" in e]
        assert len(errors) == 1


class TestProductClass:
    def test_direct_sum(self):
        p = WindingVector((1, 0))
        a = WindingVector((2,))
        assert nav.product_class(p, a).windings == (1, 0, 2)

    def test_zero_sum(self):
        assert nav.product_class(WindingVector((0,)), WindingVector((0, 0))).windings == (0, 0, 0)

    def test_interleaved_composite_matches_sequential(self):
        # doubled workspace: perception obstacles at y=0, action obstacles at y=10
        ws_p = Workspace((Disk((0.0, 0.0), 0.5),), base=(2.0, -2.0))
        ws_a = Workspace((Disk((0.0, 10.0), 0.5),), base=(2.0, 8.0))
        ws_joint = Workspace(ws_p.obstacles + ws_a.obstacles, base=(2.0, -2.0))

        loop_p = circle((0.0, 0.0), 2.83, start_angle=math.atan2(-2.0, 2.0))
        loop_a = circle((0.0, 10.0), 2.83, start_angle=math.atan2(-2.0, 2.0))
        loop_a = [(x, y) for x, y in loop_a]

        vec_p = nav.winding_vector(loop_p, ws_p)
        vec_a = nav.winding_vector(loop_a, ws_a)
        sequential = nav.product_class(vec_p, vec_a)

        # interleave: half of P, detour through all of A, rest of P
        half = len(loop_p) // 2
        bridge_to_a = [loop_p[half], loop_a[0]]
        joint = (
            loop_p[: half + 1]
            + bridge_to_a[1:]
            + loop_a[1:]
            + [loop_a[0], loop_p[half]]
            + loop_p[half + 1:]
        )
        vec_joint = nav.winding_vector(joint, ws_joint)
        assert vec_joint.windings == sequential.windings


class TestWorkspaceValidation:
    def test_overlapping_obstacles_rejected(self):
        with pytest.raises(Exception):
            Workspace((Disk((0, 0), 1.0), Disk((1.5, 0), 1.0)), base=(5, 5))

    def test_base_inside_obstacle_rejected(self):
        with pytest.raises(Exception):
            Workspace((Disk((0, 0), 1.0),), base=(0.2, 0.2))

    def test_json_round_trip(self):
        again = Workspace.from_json_obj(WS2.to_json_obj())
        assert again == WS2
