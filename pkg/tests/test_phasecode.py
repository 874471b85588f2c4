import math

import pytest
from hypothesis import given, strategies as st

from cyclos import chaincore, phasecode
from cyclos.chaincore import Chain1
from cyclos.errors import ClosureError, CyclosError, UnwrapError
from cyclos.phasecode import Oscillator, PhaseBinning, TorusPath

TWO_PI = 2 * math.pi


class TestWrapTime:
    def test_zero(self):
        assert phasecode.wrap_time(0.0, Oscillator(4.0)) == 0.0

    def test_full_period_at_theta_band_edge(self):
        # 8 Hz, t = one period = 0.125 s -> phase back to 0
        assert phasecode.wrap_time(0.125, Oscillator(8.0)) == pytest.approx(0.0, abs=1e-12)

    def test_quarter_period(self):
        assert phasecode.wrap_time(0.03125, Oscillator(8.0)) == pytest.approx(math.pi / 2)

    @given(
        st.floats(-50.0, 50.0),
        st.floats(0.5, 40.0),
        st.floats(0.0, TWO_PI),
    )
    def test_periodicity(self, t, freq, offset):
        osc = Oscillator(freq, offset)
        a = phasecode.wrap_time(t, osc)
        b = phasecode.wrap_time(t + osc.period, osc)
        assert phasecode.circular_distance(a, b) < 1e-9

    def test_result_in_range(self):
        for t in (-3.7, -0.1, 0.0, 0.9, 123.4):
            phase = phasecode.wrap_time(t, Oscillator(7.3, 1.2))
            assert 0.0 <= phase < TWO_PI


class TestPhaseRingChain:
    def test_l3_closes(self):
        cx, chain = phasecode.phase_ring_chain(PhaseBinning(3))
        assert chaincore.boundary1(chain, cx) == {}

    def test_l12_is_a_circle(self):
        cx, chain = phasecode.phase_ring_chain(PhaseBinning(12))
        assert chaincore.betti(cx, 1) == 1
        assert not chaincore.homology_class(chain, cx).is_zero()
        assert chaincore.verify_dd_zero(cx)

    def test_missing_edge_leaves_endpoints(self):
        cx, chain = phasecode.phase_ring_chain(PhaseBinning(5))
        broken = Chain1.from_dict({i: c for (i, c) in chain.coefficients if i != 2})
        assert chaincore.boundary1(broken, cx) != {}

    def test_too_few_bins(self):
        with pytest.raises(CyclosError):
            PhaseBinning(1)


class TestWindingNumber:
    def test_ccw_lap(self):
        phases = [i * TWO_PI / 8 % TWO_PI for i in range(9)]
        assert phasecode.winding_number(phases, closed=True) == 1

    def test_cw_lap(self):
        phases = [(-i * TWO_PI / 8) % TWO_PI for i in range(9)]
        assert phasecode.winding_number(phases, closed=True) == -1

    def test_double_speed_modular_jumps(self):
        # jumps of k=2 bins over L=12 steps return to start with winding 2
        length = 12
        phases = [(2 * i * TWO_PI / length) % TWO_PI for i in range(length + 1)]
        assert phasecode.winding_number(phases, closed=True) == 2

    def test_ambiguous_gap_rejected(self):
        with pytest.raises(UnwrapError):
            phasecode.winding_number([0.0, math.pi], closed=False)

    def test_open_input_with_closed_flag_rejected(self):
        with pytest.raises(ClosureError):
            phasecode.winding_number([0.0, 1.0, 2.0], closed=True)

    @given(st.integers(-3, 3), st.integers(8, 40))
    def test_winding_matches_construction(self, k, n_steps):
        # need |k| * 2pi / n < pi for unambiguous unwrapping
        if 2 * abs(k) >= n_steps:
            return
        phases = [(k * i * TWO_PI / n_steps) % TWO_PI for i in range(n_steps + 1)]
        assert phasecode.winding_number(phases, closed=True) == k

    def test_concatenation_additivity_and_reversal(self):
        lap = [i * TWO_PI / 8 % TWO_PI for i in range(9)]
        double = lap + lap[1:]
        assert phasecode.winding_number(double, closed=True) == 2
        assert phasecode.winding_number(list(reversed(lap)), closed=True) == -1


class TestTorusWinding:
    def test_gamma_nested_in_theta(self):
        # 40 Hz gamma inside 8 Hz theta over one theta period -> (5, 1)
        theta, gamma = Oscillator(8.0), Oscillator(40.0)
        times = [i * theta.period / 256 for i in range(257)]
        samples = [(phasecode.wrap_time(t, theta), phasecode.wrap_time(t, gamma)) for t in times]
        assert phasecode.torus_winding(TorusPath(tuple(samples))) == (5, 1)

    def test_constant_point(self):
        samples = tuple((1.0, 2.0) for _ in range(5))
        assert phasecode.torus_winding(TorusPath(samples)) == (0, 0)

    def test_theta_only_lap(self):
        samples = tuple((i * TWO_PI / 8 % TWO_PI, 0.5) for i in range(9))
        assert phasecode.torus_winding(TorusPath(samples)) == (0, 1)
