import math
import random

import numpy as np
import pytest

from encircle import (
    NoiseModel,
    RobotState,
    TargetSet,
    measure,
    min_distance,
    rng,
    step,
    true_polar,
    wrap_angle,
)


class TestWrap:
    def test_half_open_interval(self):
        assert wrap_angle(math.pi) == math.pi
        assert wrap_angle(-math.pi) == math.pi
        assert wrap_angle(0.0) == 0.0

    def test_randomized(self):
        r = random.Random(3)
        for _ in range(2000):
            a = r.uniform(-50, 50)
            w = wrap_angle(a)
            assert -math.pi < w <= math.pi
            # congruent modulo 2pi
            assert math.isclose(math.sin(w), math.sin(a), abs_tol=1e-9)
            assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-9)


class TestStep:
    def test_straight_line(self):
        s = step(RobotState(0, 0, 0), u=0.0, vc=0.5, dt=1.0)
        assert (s.x, s.y, s.theta) == (0.5, 0.0, 0.0)

    def test_straight_line_up(self):
        s = step(RobotState(0, 0, math.pi / 2), u=0.0, vc=0.5, dt=2.0)
        assert s.x == pytest.approx(0.0, abs=1e-16)
        assert s.y == pytest.approx(1.0, abs=1e-15)
        assert s.theta == math.pi / 2

    def test_circular_arc_against_exact_solution(self):
        # oracle: exact arc around (2, 2) with radius 2 at u = vc/rc
        vc, rc = 0.5, 2.0
        u = vc / rc
        s = RobotState(4.0, 2.0, math.pi / 2)
        dt = 0.01
        for k in range(1, 1001):
            s = step(s, u, vc, dt)
            ang = u * k * dt
            ex = 2.0 + rc * math.cos(ang)
            ey = 2.0 + rc * math.sin(ang)
            assert math.hypot(s.x - ex, s.y - ey) < 1e-9
            d = math.hypot(s.x - 2.0, s.y - 2.0)
            assert abs(d - rc) < 1e-9

    def test_refinement_order(self):
        # one 0.01 step vs ten 0.001 substeps under the same held u
        coarse = RobotState(0.3, -0.2, 0.8)
        fine = coarse
        r = random.Random(11)
        err = 0.0
        for k in range(100):
            u = 0.8 * math.sin(k * 0.01) + 0.3
            coarse = step(coarse, u, 0.5, 0.01)
            for _ in range(10):
                fine = step(fine, u, 0.5, 0.001)
        err = math.hypot(coarse.x - fine.x, coarse.y - fine.y)
        assert err < 1e-8  # per unit time

    def test_speed_bound(self):
        r = random.Random(5)
        for _ in range(500):
            s0 = RobotState(r.uniform(-5, 5), r.uniform(-5, 5), r.uniform(-3, 3))
            u = r.uniform(-50, 50)
            vc = r.uniform(0.1, 2.0)
            dt = r.uniform(1e-4, 0.05)
            s1 = step(s0, u, vc, dt)
            chord = math.hypot(s1.x - s0.x, s1.y - s0.y)
            assert chord <= vc * dt * (1 + 1e-9) + 1e-15

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            step(RobotState(0, 0, 0), math.inf, 0.5, 0.01)
        with pytest.raises(ValueError):
            step(RobotState(0, 0, 0), 0.0, 0.5, -0.01)
        with pytest.raises(ValueError):
            step(RobotState(0, 0, 0), 0.0, 0.0, 0.01)
        with pytest.raises(ValueError):
            RobotState(math.nan, 0, 0)


class TestMeasure:
    def test_single_target_exact(self):
        d = measure(RobotState(7, 2, 0), TargetSet(((2.0, 2.0),)), NoiseModel(0.0, 0), 0)
        assert d == 5.0

    def test_min_over_targets(self):
        ts = TargetSet(((3.0, 0.0), (0.0, 4.0)))
        d = measure(RobotState(0, 0, 0), ts, NoiseModel(0.0, 0), 0)
        assert d == 3.0

    def test_tie_breaks_lowest_index(self):
        ts = TargetSet(((1.0, 0.0), (-1.0, 0.0)))
        _, idx = min_distance(RobotState(0, 0, 0), ts)
        assert idx == 0

    def test_noise_draw_matches_generator(self):
        noise = NoiseModel(0.05, 1234)
        d = measure(RobotState(7, 2, 0), TargetSet(((2.0, 2.0),)), noise, 0)
        assert d == 5.0 + 0.05 * rng.gauss(1234, 0)

    def test_noise_reproducible_bitwise(self):
        noise = NoiseModel(0.1, 42)
        ts = TargetSet(((2.0, 2.0),))
        a = [measure(RobotState(7, 2, 0), ts, noise, k) for k in range(256)]
        b = [measure(RobotState(7, 2, 0), ts, noise, k) for k in range(256)]
        assert a == b

    def test_sigma_zero_matches_true_polar(self):
        st = RobotState(3.3, -1.7, 0.4)
        ts = TargetSet(((2.0, 2.0),))
        assert measure(st, ts, NoiseModel(0.0, 0), 7) == true_polar(st, (2.0, 2.0)).d

    def test_empty_target_set_rejected(self):
        with pytest.raises(ValueError):
            TargetSet(())


class TestTruePolar:
    def test_east_of_target(self):
        p = true_polar(RobotState(4, 2, math.pi / 2), (2.0, 2.0))
        assert (p.d, p.eta, p.phi) == (2.0, 0.0, math.pi / 2)

    def test_north_of_target(self):
        p = true_polar(RobotState(2, 4, math.pi), (2.0, 2.0))
        assert p.d == 2.0
        assert p.eta == math.pi / 2
        assert p.phi == pytest.approx(math.pi / 2, abs=1e-15)

    def test_reference_start_pose(self):
        p = true_polar(RobotState(7, 2, -3 * math.pi / 5), (2.0, 2.0))
        assert p.d == 5.0
        assert p.eta == 0.0
        assert p.phi == pytest.approx(-3 * math.pi / 5, abs=1e-15)

    def test_coincident_rejected(self):
        with pytest.raises(ValueError):
            true_polar(RobotState(2, 2, 0), (2.0, 2.0))
