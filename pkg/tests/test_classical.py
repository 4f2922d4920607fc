import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import brentq

from frontsim.kinetics import Phase, flow_inside, flow_outside, reaction_rate
from frontsim.state import H2Violation, IntervalSet, Profile
from frontsim.classical import (
    EventKind,
    NotReached,
    run_segment,
)

from conftest import expanding_setup, merge_setup, shrinking_setup

SHRINK_TA = 0.66862646601575981  # root of: integral of (2*flow_in(1,t) - 1) dt = 1
FLOW_IN_0_05 = 0.43823142335871484


def shrink_ta_oracle(pstar):
    """Independent quadrature + root-find for the vanish time."""
    integr = lambda T: quad(
        lambda t: pstar.b * flow_inside(pstar, 1.0, t) - pstar.a, 0.0, T,
        epsabs=1e-13, epsrel=1e-13,
    )[0]
    return brentq(lambda T: integr(T) - 1.0, 0.5, 1.0, xtol=1e-13)


@pytest.fixture(scope="module")
def expanding_segment(pstar):
    omega, v0 = expanding_setup(pstar)
    seg, ev = run_segment(pstar, omega, v0, 0.0, 2.0)
    assert ev is None
    return seg


@pytest.fixture(scope="module")
def shrinking_segment(pstar):
    omega, v0 = shrinking_setup(pstar)
    return run_segment(pstar, omega, v0, 0.0, 5.0)


@pytest.fixture(scope="module")
def merge_segment(pstar):
    omega, v0 = merge_setup(pstar)
    return run_segment(pstar, omega, v0, 0.0, 3.0)


class TestExpanding:
    def test_constant_speed_lines(self, expanding_segment):
        seg = expanding_segment
        ts = np.linspace(0.0, 2.0, 101)
        x1 = seg.trajectories[0].position(ts)
        x2 = seg.trajectories[1].position(ts)
        assert np.max(np.abs(x1 - (-1.0 - ts))) < 1e-12
        assert np.max(np.abs(x2 - (1.0 + ts))) < 1e-12

    def test_field_ahead_is_quiescent(self, expanding_segment):
        # the interface reaches x=5 only at t=4, so v(5, t) = 0 throughout
        for t in (0.0, 0.7, 1.999):
            assert expanding_segment.evaluate_v(5.0, t) == 0.0

    def test_field_at_center_is_pure_excited_flow(self, expanding_segment, pstar):
        for t in (0.3, 1.0, 2.0):
            assert expanding_segment.evaluate_v(0.0, t) == pytest.approx(
                flow_inside(pstar, 0.0, t), abs=1e-12
            )

    def test_field_behind_front_uses_arrival_time(self, expanding_segment, pstar):
        # x = 2 is reached at t = 1 exactly (unit speed), then excited
        val = expanding_segment.evaluate_v(2.0, 1.5)
        assert val == pytest.approx(FLOW_IN_0_05, abs=1e-10)
        assert val == pytest.approx(flow_inside(pstar, 0.0, 0.5), abs=1e-10)

    def test_arrival_times(self, expanding_segment):
        right = expanding_segment.trajectories[1]
        assert right.arrival_time(3.0) == pytest.approx(2.0, abs=1e-10)
        assert right.arrival_time(0.5) == 0.0  # already passed at start
        with pytest.raises(NotReached):
            right.arrival_time(1e6)

    def test_interface_velocities(self, expanding_segment):
        assert expanding_segment.interface_velocity(2, 0.0) == pytest.approx(1.0)
        assert expanding_segment.interface_velocity(1, 0.0) == pytest.approx(-1.0)

    def test_no_event(self, expanding_segment):
        assert expanding_segment.locate_event() is None

    def test_out_of_segment_time(self, expanding_segment):
        with pytest.raises(ValueError):
            expanding_segment.evaluate_v(0.0, 2.5)


class TestShrinking:
    def test_vanish_event_time(self, shrinking_segment, pstar):
        seg, ev = shrinking_segment
        oracle = shrink_ta_oracle(pstar)
        assert oracle == pytest.approx(SHRINK_TA, abs=1e-12)
        assert ev is not None and ev.kind is EventKind.VANISH
        assert ev.time == pytest.approx(SHRINK_TA, abs=1e-8)
        assert ev.position == pytest.approx(0.0, abs=1e-9)
        assert ev.indices == (1, 2)

    def test_interface_velocity_sign(self, shrinking_segment):
        seg, _ = shrinking_segment
        assert seg.interface_velocity(2, 0.0) == pytest.approx(-1.0)

    def test_strict_monotonicity_and_delta_monitor(self, shrinking_segment):
        seg, ev = shrinking_segment
        ts = np.linspace(0.0, ev.time, 200)
        x1 = seg.trajectories[0].position(ts)
        x2 = seg.trajectories[1].position(ts)
        assert np.all(np.diff(x1) > 0)
        assert np.all(np.diff(x2) < 0)
        # speeds only grow away from the stall level here
        assert seg.stats.min_speed >= 1.0 - 1e-9
        assert not seg.stats.degeneracy_events

    def test_field_nonnegative(self, shrinking_segment, rng):
        seg, ev = shrinking_segment
        xs = rng.uniform(-3, 3, size=400)
        ts = rng.uniform(0.0, ev.time, size=400)
        assert np.all(np.asarray(seg.evaluate_v(xs, ts)) >= 0.0)

    def test_never_crossed_points_follow_pure_flow(self, shrinking_segment, pstar):
        seg, ev = shrinking_segment
        # outside points are never crossed while the interval shrinks
        for x in (-1.5, 2.0, 7.0):
            for t in (0.2, 0.5):
                assert seg.evaluate_v(x, t) == pytest.approx(
                    flow_outside(pstar, 1.0, t), abs=1e-12
                )
        # the center is excited until the collision
        for t in (0.2, 0.6):
            assert seg.evaluate_v(0.0, t) == pytest.approx(
                flow_inside(pstar, 1.0, t), abs=1e-12
            )

    def test_field_lipschitz_in_space(self, shrinking_segment, rng):
        # sampled difference quotients stay bounded; here the only spatial
        # variation comes through arrival times, so the constant is O(1)
        seg, ev = shrinking_segment
        xs = rng.uniform(-2.5, 2.5, size=500)
        ys = rng.uniform(-2.5, 2.5, size=500)
        ts = rng.uniform(0.0, ev.time, size=500)
        dv = np.abs(np.asarray(seg.evaluate_v(xs, ts)) - np.asarray(seg.evaluate_v(ys, ts)))
        ratios = dv / np.maximum(np.abs(xs - ys), 1e-9)
        assert float(np.max(ratios)) <= 2.0

    def test_field_satisfies_phase_ode(self, shrinking_segment, pstar):
        seg, ev = shrinking_segment
        h = 1e-6
        for x, phase in ((0.0, Phase.INSIDE), (2.0, Phase.OUTSIDE)):
            t = 0.3
            fd = (seg.evaluate_v(x, t + h) - seg.evaluate_v(x, t - h)) / (2 * h)
            rate = reaction_rate(pstar, phase, seg.evaluate_v(x, t))
            assert fd == pytest.approx(rate, rel=1e-6)


class TestMerge:
    def test_merge_event(self, merge_segment):
        seg, ev = merge_segment
        assert ev.kind is EventKind.MERGE
        assert ev.time == pytest.approx(1.0, abs=1e-6)
        assert ev.position == pytest.approx(0.0, abs=1e-8)
        assert ev.indices == (2, 3)
        assert (ev.components_before, ev.components_after) == (2, 1)

    def test_two_crossings_compose_flows(self, merge_segment, pstar):
        # x in (0, 1) is excited by the left-moving front at exactly t = 1 - x
        seg, ev = merge_segment
        for x, t in ((0.5, 0.9), (0.25, 0.8)):
            expected = flow_inside(pstar, 0.0, t - (1.0 - x))
            assert seg.evaluate_v(x, t) == pytest.approx(expected, abs=1e-10)

    def test_gap_statistics(self, merge_segment):
        seg, ev = merge_segment
        assert seg.stats.min_gap < 1e-3  # the inner gap really closed


class TestFourSignCases:
    def make_profile(self, rising: bool):
        # linear between 0.25 and 0.75 across the interval, so W flips sign
        xs = np.array([-2.0, 2.0])
        vs = np.array([0.25, 0.75]) if rising else np.array([0.75, 0.25])
        return Profile(xs, vs)

    def test_case_both_positive_expands(self, pstar):
        omega, v0 = expanding_setup(pstar)
        seg, _ = run_segment(pstar, omega, v0, 0.0, 0.2)
        assert seg.trajectories[0].sign == -1 and seg.trajectories[1].sign == 1

    def test_case_both_negative_shrinks(self, pstar):
        omega, v0 = shrinking_setup(pstar)
        seg, ev = run_segment(pstar, omega, v0, 0.0, 0.2)
        assert seg.trajectories[0].sign == 1 and seg.trajectories[1].sign == -1

    def test_case_mixed_pulse_moving_left(self, pstar):
        # W > 0 at the left endpoint, W < 0 at the right: both move left
        omega = IntervalSet((-1.0, 1.0))
        seg, _ = run_segment(pstar, omega, self.make_profile(rising=True), 0.0, 0.2)
        assert seg.trajectories[0].sign == -1 and seg.trajectories[1].sign == -1

    def test_case_mixed_pulse_moving_right(self, pstar):
        omega = IntervalSet((-1.0, 1.0))
        seg, _ = run_segment(pstar, omega, self.make_profile(rising=False), 0.0, 0.2)
        assert seg.trajectories[0].sign == 1 and seg.trajectories[1].sign == 1


class TestSolverBehavior:
    def test_validation_runs_first(self, pstar):
        omega = IntervalSet((-1.0, 1.0))
        with pytest.raises(H2Violation):
            run_segment(pstar, omega, Profile.constant(0.5, (-5, 5)), 0.0, 1.0)

    def test_advance_respects_dt_max(self, pstar):
        omega, v0 = expanding_setup(pstar)
        from frontsim.classical import ClassicalSegment

        seg = ClassicalSegment(pstar, omega, v0, 0.0, 2.0)
        seg.advance(dt_max=1e-3)
        assert seg.t_end <= 1e-3 + 1e-12

    def test_self_convergence_order(self, pstar):
        # quartering the tolerance must shrink trajectory differences by
        # at least 4x per level (observed order two under log2 scaling)
        omega, v0 = shrinking_setup(pstar)
        ts = np.linspace(0.0, 0.6, 25)
        sols = []
        for tol in (1e-5, 1e-5 / 4, 1e-5 / 16):
            seg, _ = run_segment(pstar, omega, v0, 0.0, 0.6, tol_step=tol)
            sols.append(np.column_stack([seg.trajectories[0].position(ts),
                                         seg.trajectories[1].position(ts)]))
        d1 = np.max(np.abs(sols[0] - sols[1]))
        d2 = np.max(np.abs(sols[1] - sols[2]))
        order = math.log2(d1 / d2)
        assert order >= 2.0, f"observed order {order:.2f} from d1={d1:.3e}, d2={d2:.3e}"

    def test_integral_identity_along_trajectory(self, pstar):
        # displacement equals the time integral of the speed law along the path
        from frontsim.weak import WeakSolution, glue, interface_speed_integral

        omega, v0 = shrinking_setup(pstar)
        seg, ev = run_segment(pstar, omega, v0, 0.0, 5.0)
        w = glue(WeakSolution(pstar), seg)
        rng = np.random.default_rng(7)
        for _ in range(8):
            t1, t2 = np.sort(rng.uniform(0.0, ev.time, size=2))
            if t2 - t1 < 1e-3:
                continue
            traj = seg.trajectories[1]
            lhs = traj.position(t2) - traj.position(t1)
            rhs = interface_speed_integral(w, traj.label, t1, t2)
            assert lhs == pytest.approx(rhs, abs=1e-6)

    def test_empty_interval_set_runs_trivially(self, pstar):
        seg, ev = run_segment(pstar, IntervalSet.empty(), Profile.constant(1.0, (-2, 2)), 0.0, 3.0)
        assert ev is None and seg.finished
        assert seg.evaluate_v(0.0, 3.0) == pytest.approx(flow_outside(pstar, 1.0, 3.0), abs=1e-12)
