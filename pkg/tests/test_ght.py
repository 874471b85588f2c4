"""Hough accumulation, permutation exactness, saccade audits, peak persistence."""

import math
import random

import numpy as np
import pytest

from cyclos import ght
from cyclos.errors import NoPeakError, PreconditionError, TableError
from cyclos.ght import (
    Accumulator,
    AccumulatorConfig,
    Feature,
    GazeTransform,
    ModelTable,
    accumulate,
    argmax_peak,
    peak_persistence,
    saccade_invariance_audit,
)

CONFIG = AccumulatorConfig(extent=(0.0, 100.0, 0.0, 100.0), shape=(50, 50))
TABLE = ModelTable({0: (10.0, 0.0), 1: (0.0, 10.0), 2: (-7.0, -7.0)})


def synthetic_scene(center, descriptors=(0, 1, 2), angles=(0.0, 0.5, 1.1)):
    """Features whose votes all point at `center`."""
    feats = []
    for d, a in zip(descriptors, angles):
        ox, oy = TABLE.offsets[d]
        c, s = math.cos(a), math.sin(a)
        rotated = (c * ox - s * oy, s * ox + c * oy)
        feats.append(Feature((center[0] - rotated[0], center[1] - rotated[1]), a, d))
    return feats


class TestAccumulate:
    def test_single_delta_vote(self):
        scene = synthetic_scene((42.0, 17.0), descriptors=(0,), angles=(0.3,))
        acc = accumulate([(GazeTransform(), scene)], TABLE, CONFIG)
        peak = argmax_peak(acc)
        assert acc.grid.sum() == 1.0
        assert math.dist(peak.point, (42.0, 17.0)) <= 2.0  # within one cell diagonal

    def test_permutation_bit_identical(self):
        rng = random.Random(3)
        scene = synthetic_scene((50.0, 50.0))
        extra = synthetic_scene((20.0, 80.0))
        glimpses = [
            (GazeTransform(0.0, (5.0, 0.0)), [GazeTransform(0.0, (5.0, 0.0)).apply_feature(f) for f in scene]),
            (GazeTransform(), list(extra)),
            (GazeTransform(0.4), [GazeTransform(0.4).apply_feature(f) for f in scene]),
        ]
        base = accumulate(glimpses, TABLE, CONFIG)
        for _ in range(5):
            shuffled = list(glimpses)
            rng.shuffle(shuffled)
            shuffled = [(g, rng.sample(list(fs), len(fs))) for g, fs in shuffled]
            other = accumulate(shuffled, TABLE, CONFIG)
            assert other.serialize_grid() == base.serialize_grid()

    def test_gaussian_permutation_bit_identical(self):
        config = AccumulatorConfig((0, 100, 0, 100), (50, 50), kernel="gaussian", bandwidth=2.0)
        rng = random.Random(7)
        scene = synthetic_scene((50.0, 50.0))
        glimpses = [(GazeTransform(), list(scene)), (GazeTransform(), list(reversed(scene)))]
        base = accumulate(glimpses, TABLE, config)
        shuffled = [(g, rng.sample(list(fs), len(fs))) for g, fs in reversed(glimpses)]
        assert accumulate(shuffled, TABLE, config).serialize_grid() == base.serialize_grid()

    def test_re_registration_recovers_identity_votes(self):
        scene = synthetic_scene((30.0, 60.0))
        gaze = GazeTransform(0.7, (12.0, -4.0))
        observed = [gaze.apply_feature(f) for f in scene]
        acc_identity = accumulate([(GazeTransform(), scene)], TABLE, CONFIG)
        acc_reregistered = accumulate([(gaze, observed)], TABLE, CONFIG)
        assert argmax_peak(acc_reregistered).point == argmax_peak(acc_identity).point

    def test_unknown_descriptor_rejected(self):
        feat = Feature((10.0, 10.0), 0.0, 99)
        with pytest.raises(TableError):
            accumulate([(GazeTransform(), [feat])], TABLE, CONFIG)

    def test_overflow_bucket(self):
        feat = Feature((500.0, 500.0), 0.0, 0)
        acc = accumulate([(GazeTransform(), [feat])], TABLE, CONFIG)
        assert acc.overflow_count == 1
        assert acc.grid.sum() == 0.0


class TestArgmaxPeak:
    def test_tie_takes_lowest_linear_index_and_flags(self):
        grid = np.zeros((4, 4))
        grid[2, 1] = grid[1, 3] = 5.0
        acc = Accumulator(CONFIG, grid, 0, 0.0)
        peak = argmax_peak(acc)
        assert peak.tied
        # row-major: (1, 3) precedes (2, 1)
        assert peak.point == CONFIG.cell_center(3, 1)

    def test_empty_accumulator_rejected(self):
        acc = Accumulator(CONFIG, np.zeros((50, 50)), 0, 0.0)
        with pytest.raises(NoPeakError):
            argmax_peak(acc)

    def test_noisy_gaussian_votes_near_truth(self):
        config = AccumulatorConfig((0, 100, 0, 100), (50, 50), kernel="gaussian", bandwidth=2.0)
        rng = np.random.default_rng(11)
        truth = (55.0, 45.0)
        feats = []
        for _ in range(100):
            jitter = rng.normal(0.0, 1.0, size=2)
            feats += synthetic_scene((truth[0] + jitter[0], truth[1] + jitter[1]),
                                     descriptors=(0,), angles=(float(rng.uniform(0, 6.2)),))
        acc = accumulate([(GazeTransform(), feats)], TABLE, config)
        peak = argmax_peak(acc)
        cell_w = 100.0 / 50
        assert abs(peak.point[0] - truth[0]) <= 1.5 * cell_w
        assert abs(peak.point[1] - truth[1]) <= 1.5 * cell_w


class TestSaccadeAudit:
    SCENE = synthetic_scene((48.0, 52.0))

    def test_two_closed_scanpaths_agree(self):
        paths = [
            [GazeTransform(0.0, (6.0, 0.0)), GazeTransform(0.0, (-6.0, 0.0))],
            [GazeTransform(0.0, (0.0, 9.0)), GazeTransform(0.0, (0.0, -9.0)),
             GazeTransform()],
        ]
        report = saccade_invariance_audit(self.SCENE, paths, TABLE, CONFIG)
        assert report["pass"] and report["peaks_agree_within_one_cell"]

    def test_open_path_with_reregistration_matches_closed(self):
        closed = [GazeTransform(0.0, (6.0, 0.0)), GazeTransform(0.0, (-6.0, 0.0))]
        open_path = [GazeTransform(0.0, (6.0, 0.0)), GazeTransform(0.0, (3.0, 3.0))]
        report = saccade_invariance_audit(self.SCENE, [closed, open_path], TABLE, CONFIG,
                                          re_register=True)
        assert report["pass"]

    def test_open_path_without_reregistration_reported(self):
        open_path = [GazeTransform(0.0, (6.0, 0.0)), GazeTransform(0.0, (3.0, 3.0))]
        closed = [GazeTransform(0.0, (6.0, 0.0)), GazeTransform(0.0, (-6.0, 0.0))]
        report = saccade_invariance_audit(self.SCENE, [closed, open_path], TABLE, CONFIG,
                                          re_register=False)
        assert not report["pass"]
        errors = [e for e in report["paths"] if "error" in e]
        assert len(errors) == 1 and errors[0]["path"] == 1


def brute_force_components(grid, tau):
    active = {(iy, ix) for iy in range(grid.shape[0]) for ix in range(grid.shape[1])
              if grid[iy, ix] >= tau}
    seen = set()
    count = 0
    for cell in sorted(active):
        if cell in seen:
            continue
        count += 1
        stack = [cell]
        seen.add(cell)
        while stack:
            iy, ix = stack.pop()
            for nb in ((iy - 1, ix), (iy + 1, ix), (iy, ix - 1), (iy, ix + 1)):
                if nb in active and nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
    return count


class TestPeakPersistence:
    def _bump_grid(self):
        # two bumps (heights 5 and 3) joined by a saddle at 2
        grid = np.zeros((5, 9))
        grid[2, 1:4] = [2.0, 5.0, 2.0]
        grid[2, 4] = 2.0
        grid[2, 5:8] = [2.0, 3.0, 2.0]
        return grid

    def test_single_bump_spans_all_thresholds(self):
        grid = np.zeros((5, 5))
        grid[2, 2] = 5.0
        grid[2, 1] = grid[2, 3] = 3.0
        acc = Accumulator(CONFIG, grid, 0, 0.0)
        barcode = peak_persistence(acc, [5.0, 4.0, 3.0, 2.0, 1.0])
        essential = [b for b in barcode.bars if b.death == math.inf]
        assert len(essential) == 1 and essential[0].birth == -5.0

    def test_second_bump_dies_at_saddle(self):
        acc = Accumulator(CONFIG, self._bump_grid(), 0, 0.0)
        barcode = peak_persistence(acc, [5.0, 4.0, 3.0, 2.0, 1.0])
        finite = [b for b in barcode.bars if b.death != math.inf]
        assert (-3.0, -2.0) in {(b.birth, b.death) for b in finite}
        essential = [b for b in barcode.bars if b.death == math.inf]
        assert len(essential) == 1 and essential[0].birth == -5.0

    def test_flat_zero_field_empty(self):
        acc = Accumulator(CONFIG, np.zeros((5, 5)), 0, 0.0)
        assert peak_persistence(acc, [3.0, 2.0, 1.0]).bars == ()

    def test_alive_bars_match_component_count(self):
        rng = np.random.default_rng(23)
        grid = rng.uniform(0, 10, size=(8, 8)).round(1)
        acc = Accumulator(CONFIG, grid, 0, 0.0)
        thresholds = sorted({float(v) for v in grid.flat}, reverse=True)
        barcode = peak_persistence(acc, thresholds)
        for tau in thresholds:
            alive = barcode.alive_count(0, -tau)
            assert alive == brute_force_components(grid, tau)

    def test_ascending_thresholds_rejected(self):
        acc = Accumulator(CONFIG, np.ones((3, 3)), 0, 0.0)
        with pytest.raises(PreconditionError):
            peak_persistence(acc, [1.0, 2.0])


class TestGazeTransform:
    def test_inverse_composes_to_identity(self):
        g = GazeTransform(0.8, (3.0, -2.0))
        assert g.compose(g.inverse()).is_identity()
        assert g.inverse().compose(g).is_identity()

    def test_apply_matches_manual_rotation(self):
        g = GazeTransform(math.pi / 2, (1.0, 0.0))
        x, y = g.apply((2.0, 0.0))
        assert (x, y) == pytest.approx((1.0, 2.0))
