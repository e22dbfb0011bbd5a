"""Pure Python closed-loop simulation kernel.

One loop iteration per control period: measure the nearest range, update
the washout filter, evaluate the commanded profile, compute the steering
command, log, then advance the plant one RK4 step with the command held.

This is the fallback used when the compiled extension is unavailable,
and the semantic reference for it: encircle._core transliterates this
loop expression for expression, and the test suite asserts bitwise
identical trajectories. Change them together or not at all. The scalar
math also mirrors the public single-step operations in plant, estimator,
controller, and signals.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND = "python"

_PI = math.pi
_TWO_PI = 6.283185307179586
_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_INV_2_53 = 1.0 / 9007199254740992.0


def _sm64(seed, i):
    z = (seed + (i + 1) * _GAMMA) & _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def run_loop(
    x0: float,
    y0: float,
    th0: float,
    tx,
    ty,
    base_r: float,
    amp,
    om,
    ph,
    vc: float,
    k1: float,
    k2: float,
    k3: float,
    eps1: float,
    eps2: float,
    u_max: float,
    h: float,
    sigma: float,
    seed: int,
    dt: float,
    n_steps: int,
    log_every: int,
) -> dict:
    """Simulate n_steps control periods; log every log_every-th one.

    u_max is NaN when the command is unbounded. Returns a dict of
    column arrays plus fail_step (-1, or the step index at which a
    non-finite value appeared; arrays are then partial).
    """
    n_rec = n_steps // log_every + 1
    out = {
        name: np.empty(n_rec, dtype=np.float64)
        for name in (
            "t", "x", "y", "theta", "d_true", "d_meas", "xi", "u",
            "r", "r_dot", "e1", "phi",
        )
    }
    for name in ("clamp_d", "clamp_alpha", "clamp_u"):
        out[name] = np.zeros(n_rec, dtype=np.uint8)

    txs = [float(v) for v in tx]
    tys = [float(v) for v in ty]
    n_t = len(txs)
    terms = [(float(a), float(o), float(p)) for a, o, p in zip(amp, om, ph)]
    seed = int(seed) & _MASK64
    unbounded = math.isnan(u_max)

    sin, cos, sqrt, atan2, fmod, isfinite, log_ = (
        math.sin, math.cos, math.sqrt, math.atan2, math.fmod, math.isfinite, math.log,
    )
    beta = math.exp(-h * dt)
    x, y, th = x0, y0, th0
    w = 0.0
    rec = 0
    fail_step = -1

    for k in range(n_steps + 1):
        t = k * dt

        # nearest range; ties keep the lowest index
        d_true = math.inf
        ni = 0
        for i in range(n_t):
            dx = x - txs[i]
            dy = y - tys[i]
            di = sqrt(dx * dx + dy * dy)
            if di < d_true:
                d_true = di
                ni = i

        if sigma > 0.0:
            z1m = _sm64(seed, 2 * k)
            z2m = _sm64(seed, 2 * k + 1)
            u1 = ((z1m >> 11) + 0.5) * _INV_2_53
            u2 = ((z2m >> 11) + 0.5) * _INV_2_53
            d_meas = d_true + sigma * (sqrt(-2.0 * log_(u1)) * cos(_TWO_PI * u2))
        else:
            d_meas = d_true

        # washout filter; initialized at the first measurement
        if k == 0:
            w = d_meas
            xi = 0.0
        else:
            xi = (1.0 - beta) * (d_meas - w) / dt
            w = d_meas + (w - d_meas) * beta

        # commanded profile and exact derivatives
        r = base_r
        rd = 0.0
        rdd = 0.0
        for a_, om_, ph_ in terms:
            arg = om_ * t + ph_
            s_ = sin(arg)
            c_ = cos(arg)
            r = r + a_ * s_
            rd = rd + (a_ * om_) * c_
            rdd = rdd - ((a_ * om_) * om_) * s_

        # steering law with range and rate floors
        clamped_d = d_meas <= eps1
        d_used = eps1 if clamped_d else d_meas
        a2 = vc * vc - xi * xi
        alpha = sqrt(a2) / vc if a2 > 0.0 else 0.0
        clamped_alpha = alpha <= eps2
        if clamped_alpha:
            alpha = eps2
        e1 = d_used - r
        st = e1 / k3
        if st > 1.0:
            st = 1.0
        elif st < -1.0:
            st = -1.0
        va = vc * alpha
        u = va / d_used + (k1 * ((xi - rd) + k2 * st) - rdd) / va
        clamped_u = False
        if not unbounded:
            if u > u_max:
                u = u_max
                clamped_u = True
            elif u < -u_max:
                u = -u_max
                clamped_u = True

        if not isfinite(u):
            fail_step = k
            break

        if k % log_every == 0:
            dyn = y - tys[ni]
            dxn = x - txs[ni]
            eta = atan2(dyn, dxn)
            phi = th - eta
            phi = fmod(phi, _TWO_PI)
            if phi > _PI:
                phi -= _TWO_PI
            elif phi <= -_PI:
                phi += _TWO_PI
            out["t"][rec] = t
            out["x"][rec] = x
            out["y"][rec] = y
            out["theta"][rec] = th
            out["d_true"][rec] = d_true
            out["d_meas"][rec] = d_meas
            out["xi"][rec] = xi
            out["u"][rec] = u
            out["r"][rec] = r
            out["r_dot"][rec] = rd
            out["e1"][rec] = e1
            out["phi"][rec] = phi
            out["clamp_d"][rec] = 1 if clamped_d else 0
            out["clamp_alpha"][rec] = 1 if clamped_alpha else 0
            out["clamp_u"][rec] = 1 if clamped_u else 0
            rec += 1

        if k < n_steps:
            # RK4 with u held; midpoint stages coincide (heading rate is
            # state-free), keep in lockstep with plant.step
            k1x = vc * cos(th)
            k1y = vc * sin(th)
            thm = th + 0.5 * dt * u
            k2x = vc * cos(thm)
            k2y = vc * sin(thm)
            k3x = k2x
            k3y = k2y
            the = th + dt * u
            k4x = vc * cos(the)
            k4y = vc * sin(the)
            x = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            y = y + (dt / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
            th = th + dt * u
            th = fmod(th, _TWO_PI)
            if th > _PI:
                th -= _TWO_PI
            elif th <= -_PI:
                th += _TWO_PI
            if not (isfinite(x) and isfinite(y) and isfinite(th)):
                fail_step = k
                break

    out["fail_step"] = fail_step
    out["n_records"] = rec
    return out
