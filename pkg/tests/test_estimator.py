import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from encircle import WashoutState, washout_init, washout_update


def feed(h, dt, samples, w0=None):
    """Run the filter over a sample sequence; returns the xi trace."""
    state = washout_init(h, samples[0] if w0 is None else w0)
    xis = []
    for d in samples[1:]:
        state = washout_update(state, d, dt)
        xis.append(state.xi)
    return xis, state


class TestInit:
    def test_zero_output_at_start(self):
        assert washout_init(100.0, 5.0) == WashoutState(100.0, 5.0, 0.0)
        assert washout_init(1.0, 0.0) == WashoutState(1.0, 0.0, 0.0)
        assert washout_init(100.0, 2.0) == WashoutState(100.0, 2.0, 0.0)

    def test_rejects_nonpositive_gain(self):
        with pytest.raises(ValueError):
            washout_init(0.0, 1.0)
        with pytest.raises(ValueError):
            washout_init(-5.0, 1.0)


class TestDCRejection:
    def test_constant_input_from_matched_init(self):
        # initialized at the constant, the output is exactly zero forever
        h, dt = 100.0, 0.01
        xis, _ = feed(h, dt, [5.0] * 300)
        assert all(x == 0.0 for x in xis)

    def test_constant_input_from_mismatched_state(self):
        # worst case startup: state at 0, constant 2 applied; the residual
        # decays like exp(-h t) and is below 1e-6 from t = 20/h on
        h, dt = 100.0, 0.001
        n = 1000
        xis, _ = feed(h, dt, [2.0] * (n + 1), w0=0.0)
        k_settle = int(round(20.0 / h / dt))
        assert all(abs(x) < 1e-6 for x in xis[k_settle - 1:])
        assert abs(xis[0]) > 100.0  # it really did start from a large spike


class TestRamp:
    def test_tracks_slope_within_one_percent_after_tenth_second(self):
        h, dt, slope = 100.0, 0.01, 0.3
        n = 200
        samples = [slope * k * dt for k in range(n + 1)]
        xis, _ = feed(h, dt, samples)
        after = int(round(0.1 / dt)) - 1
        for x in xis[after:]:
            assert abs(x - slope) / slope < 0.01

    def test_steady_state_is_exact_for_any_h_dt(self):
        # interval-averaged output has no ramp bias even at h*dt = 1
        for h, dt in ((100.0, 0.01), (1.0, 1.0), (400.0, 0.01)):
            samples = [0.7 * k * dt for k in range(400)]
            xis, _ = feed(h, dt, samples)
            assert xis[-1] == pytest.approx(0.7, rel=1e-9)


class TestSinusoid:
    def test_tracks_cosine_derivative(self):
        # oracle: first-order frequency response at omega = 1 with gain
        # h/sqrt(h^2+1) and phase lag atan(1/h); at h = 100 the residual
        # budget including sampling effects is under 0.02
        h, dt = 100.0, 0.01
        n = 3000
        samples = [2.0 + math.sin(k * dt) for k in range(n + 1)]
        xis, _ = feed(h, dt, samples)
        start = int(round(1.0 / dt))
        worst = max(abs(x - math.cos((k + 1) * dt)) for k, x in enumerate(xis) if k + 1 >= start)
        assert worst < 0.02

    def test_error_shrinks_with_gain(self):
        dt = 1e-4
        n = 60000
        errs = []
        for h in (10.0, 100.0, 1000.0):
            samples = [math.sin(k * dt) for k in range(n + 1)]
            xis, _ = feed(h, dt, samples)
            start = int(5.0 / dt)  # skip transients of the slowest filter
            errs.append(max(abs(x - math.cos((k + 1) * dt))
                            for k, x in enumerate(xis) if k + 1 >= start))
        assert errs[0] > errs[1] > errs[2]
        assert errs[2] < 2e-3


class TestLinearity:
    @given(
        st.integers(min_value=-8, max_value=8),
        st.integers(min_value=-8, max_value=8),
        st.integers(min_value=-100, max_value=100),
        st.integers(min_value=-100, max_value=100),
        st.integers(min_value=-100, max_value=100),
        st.integers(min_value=-100, max_value=100),
    )
    @settings(max_examples=200)
    def test_exact_for_power_of_two_weights(self, ea, eb, w1, w2, d1, d2):
        # with power-of-two weights every product is exact, so one update
        # commutes with the linear combination bitwise
        a, b = 2.0 ** ea, 2.0 ** eb
        h, dt = 100.0, 0.01
        s1 = WashoutState(h, float(w1), 0.0)
        s2 = WashoutState(h, float(w2), 0.0)
        sc = WashoutState(h, a * s1.w + b * s2.w, 0.0)
        r1 = washout_update(s1, float(d1), dt)
        r2 = washout_update(s2, float(d2), dt)
        rc = washout_update(sc, a * d1 + b * d2, dt)
        assert rc.xi == a * r1.xi + b * r2.xi
        assert rc.w == a * r1.w + b * r2.w

    def test_close_for_general_weights(self):
        r = random.Random(17)
        h, dt = 100.0, 0.01
        for _ in range(500):
            a, b = r.uniform(-3, 3), r.uniform(-3, 3)
            s1 = WashoutState(h, r.uniform(-10, 10), 0.0)
            s2 = WashoutState(h, r.uniform(-10, 10), 0.0)
            d1, d2 = r.uniform(-10, 10), r.uniform(-10, 10)
            sc = WashoutState(h, a * s1.w + b * s2.w, 0.0)
            r1 = washout_update(s1, d1, dt)
            r2 = washout_update(s2, d2, dt)
            rc = washout_update(sc, a * d1 + b * d2, dt)
            assert rc.xi == pytest.approx(a * r1.xi + b * r2.xi, rel=1e-12, abs=1e-9)


class TestStability:
    @given(st.floats(min_value=0.01, max_value=50.0))
    @settings(max_examples=100)
    def test_no_blowup_for_any_h_dt(self, hdt):
        # pole exp(-h dt) is in (0, 1) for all h dt > 0: bounded response
        dt = 0.01
        h = hdt / dt
        samples = [5.0 * ((k // 10) % 2) for k in range(200)]  # square wave
        xis, state = feed(h, dt, samples, w0=0.0)
        bound = h * 5.0 + 1.0
        assert all(abs(x) <= bound for x in xis)
        assert math.isfinite(state.w)

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            washout_update(washout_init(100.0, 1.0), 1.0, 0.0)
