import math
import random

import pytest

from encircle import Constant, RefSample, Sinusoid, Sum, bounds, command_from_dict, evaluate


def central_diff(cmd, t, step=1e-5):
    """Finite-difference oracle for the first two derivatives of r."""
    rp = evaluate(cmd, t + step).r
    rm = evaluate(cmd, t - step).r
    r0 = evaluate(cmd, t).r
    d1 = (rp - rm) / (2.0 * step)
    d2 = (rp - 2.0 * r0 + rm) / (step * step)
    return d1, d2


def random_command(rng):
    kind = rng.randrange(3)
    if kind == 0:
        return Constant(rng.uniform(0.5, 30.0))
    if kind == 1:
        off = rng.uniform(2.0, 30.0)
        return Sinusoid(off, rng.uniform(0.0, 0.9) * off, rng.uniform(0.01, 2.0), rng.uniform(-3, 3))
    members = [random_command(rng) for _ in range(rng.randrange(1, 4))]
    return Sum(tuple(members))


class TestEvaluate:
    def test_constant(self):
        assert evaluate(Constant(2.0), 37.5) == RefSample(2.0, 0.0, 0.0)

    def test_sinusoid_at_zero(self):
        s = evaluate(Sinusoid(20.0, 1.8, 0.2, 0.0), 0.0)
        d1, d2 = central_diff(Sinusoid(20.0, 1.8, 0.2, 0.0), 0.0)
        assert s.r == 20.0
        assert s.r_dot == pytest.approx(0.36, abs=1e-12) == pytest.approx(d1, rel=1e-6)
        assert s.r_ddot == pytest.approx(0.0, abs=1e-10) and abs(d2) < 1e-4

    def test_sinusoid_at_peak(self):
        cmd = Sinusoid(20.0, 1.8, 0.2, 0.0)
        t = math.pi / 0.4
        s = evaluate(cmd, t)
        d1, d2 = central_diff(cmd, t)
        assert s.r == pytest.approx(21.8, abs=1e-12)
        assert s.r_dot == pytest.approx(0.0, abs=1e-12)
        assert s.r_ddot == pytest.approx(-0.072, abs=1e-12)
        assert s.r_dot == pytest.approx(d1, abs=1e-6)
        assert s.r_ddot == pytest.approx(d2, rel=1e-4)

    def test_derivatives_match_finite_differences(self):
        rng = random.Random(7)
        for _ in range(1000):
            cmd = random_command(rng)
            t = rng.uniform(-50.0, 50.0)
            s = evaluate(cmd, t)
            d1, d2 = central_diff(cmd, t)
            scale1 = max(1.0, abs(s.r_dot))
            scale2 = max(1.0, abs(s.r_ddot))
            assert abs(s.r_dot - d1) / scale1 < 1e-6
            assert abs(s.r_ddot - d2) / scale2 < 1e-4  # second difference loses precision

    def test_rejects_nonfinite_time(self):
        with pytest.raises(ValueError):
            evaluate(Constant(1.0), math.nan)


class TestBounds:
    def test_constant(self):
        assert bounds(Constant(2.0)) == (0.0, 0.0)

    def test_sinusoid(self):
        rv, ra = bounds(Sinusoid(20.0, 1.8, 0.2, 0.0))
        assert rv == pytest.approx(0.36, abs=1e-15)
        assert ra == pytest.approx(0.072, abs=1e-15)

    def test_sum_triangle_bound(self):
        cmd = Sum((Sinusoid(10.0, 1.0, 0.1, 0.0), Sinusoid(0.0, 0.5, 0.2, 0.0)))
        rv, ra = bounds(cmd)
        assert rv == pytest.approx(0.2, abs=1e-15)
        assert ra == pytest.approx(0.03, abs=1e-15)
        # dense-sampling oracle over the 20pi common period: the rate bound
        # is attained (cosine peaks align at t=0), the acceleration bound
        # is not (sine peaks of the two tones never align)
        ts = [k * (20.0 * math.pi) / 200000 for k in range(200001)]
        sup_rd = max(abs(evaluate(cmd, t).r_dot) for t in ts)
        sup_rdd = max(abs(evaluate(cmd, t).r_ddot) for t in ts)
        assert sup_rd == pytest.approx(rv, abs=1e-6)
        assert sup_rdd < ra
        assert sup_rdd == pytest.approx(0.027357, abs=1e-4)

    def test_bounds_dominate_samples(self):
        rng = random.Random(21)
        for _ in range(200):
            cmd = random_command(rng)
            rv, ra = bounds(cmd)
            for _ in range(25):
                s = evaluate(cmd, rng.uniform(0.0, 200.0))
                assert abs(s.r_dot) <= rv + 1e-12
                assert abs(s.r_ddot) <= ra + 1e-12


class TestValidation:
    def test_constant_must_be_positive(self):
        with pytest.raises(ValueError):
            Constant(0.0)
        with pytest.raises(ValueError):
            Constant(-1.0)

    def test_amplitude_must_be_nonnegative(self):
        with pytest.raises(ValueError):
            Sinusoid(10.0, -1.0, 0.2)

    def test_sum_needs_members(self):
        with pytest.raises(ValueError):
            Sum(())

    def test_ensure_positive(self):
        Sinusoid(20.0, 1.8, 0.2).ensure_positive()
        with pytest.raises(ValueError):
            Sinusoid(1.0, 2.0, 0.2).ensure_positive()
        # members may dip nonpositive as long as the sum cannot
        Sum((Sinusoid(10.0, 1.0, 0.1), Sinusoid(0.0, 0.5, 0.2))).ensure_positive()
        with pytest.raises(ValueError):
            Sum((Sinusoid(1.0, 1.0, 0.1), Sinusoid(0.0, 0.5, 0.2))).ensure_positive()


class TestDictRoundTrip:
    def test_round_trip(self):
        cmd = Sum((Constant(3.0), Sinusoid(20.0, 1.8, 0.2, 0.5)))
        assert command_from_dict(cmd.to_dict()) == cmd

    def test_rejects_unknown_keys(self):
        with pytest.raises(ValueError):
            command_from_dict({"type": "constant", "rc": 2.0, "bogus": 1})

    def test_rejects_unknown_type(self):
        with pytest.raises(ValueError):
            command_from_dict({"type": "spline", "knots": []})
