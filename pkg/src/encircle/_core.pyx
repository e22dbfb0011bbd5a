# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled closed-loop simulation kernel.

Expression-for-expression transliteration of encircle._purepy.run_loop;
the test suite asserts bitwise identical trajectories across the two
backends. Change them together or not at all. Compile without
floating-point contraction (see setup.py) so IEEE semantics match the
interpreter's.
"""

import numpy as np

from libc.math cimport INFINITY, atan2, cos, exp, fmod, isfinite, isnan, log, sin, sqrt

BACKEND = "cython"

cdef double PI = 3.141592653589793
cdef double TWO_PI = 6.283185307179586
cdef double INV_2_53 = 1.0 / 9007199254740992.0
cdef unsigned long long GAMMA = 0x9E3779B97F4A7C15ULL


cdef inline unsigned long long _sm64(unsigned long long seed, unsigned long long i) nogil:
    cdef unsigned long long z = seed + (i + 1ULL) * GAMMA
    z ^= z >> 30
    z = z * 0xBF58476D1CE4E5B9ULL
    z ^= z >> 27
    z = z * 0x94D049BB133111EBULL
    z ^= z >> 31
    return z


def run_loop(
    double x0,
    double y0,
    double th0,
    double[::1] tx,
    double[::1] ty,
    double base_r,
    double[::1] amp,
    double[::1] om,
    double[::1] ph,
    double vc,
    double k1,
    double k2,
    double k3,
    double eps1,
    double eps2,
    double u_max,
    double h,
    double sigma,
    object seed,
    double dt,
    long n_steps,
    long log_every,
):
    """See encircle._purepy.run_loop for the contract."""
    cdef long n_rec = n_steps // log_every + 1
    t_a = np.empty(n_rec, dtype=np.float64)
    x_a = np.empty(n_rec, dtype=np.float64)
    y_a = np.empty(n_rec, dtype=np.float64)
    theta_a = np.empty(n_rec, dtype=np.float64)
    d_true_a = np.empty(n_rec, dtype=np.float64)
    d_meas_a = np.empty(n_rec, dtype=np.float64)
    xi_a = np.empty(n_rec, dtype=np.float64)
    u_a = np.empty(n_rec, dtype=np.float64)
    r_a = np.empty(n_rec, dtype=np.float64)
    r_dot_a = np.empty(n_rec, dtype=np.float64)
    e1_a = np.empty(n_rec, dtype=np.float64)
    phi_a = np.empty(n_rec, dtype=np.float64)
    clamp_d_a = np.zeros(n_rec, dtype=np.uint8)
    clamp_alpha_a = np.zeros(n_rec, dtype=np.uint8)
    clamp_u_a = np.zeros(n_rec, dtype=np.uint8)

    cdef double[::1] t_v = t_a
    cdef double[::1] x_v = x_a
    cdef double[::1] y_v = y_a
    cdef double[::1] theta_v = theta_a
    cdef double[::1] d_true_v = d_true_a
    cdef double[::1] d_meas_v = d_meas_a
    cdef double[::1] xi_v = xi_a
    cdef double[::1] u_v = u_a
    cdef double[::1] r_v = r_a
    cdef double[::1] r_dot_v = r_dot_a
    cdef double[::1] e1_v = e1_a
    cdef double[::1] phi_v = phi_a
    cdef unsigned char[::1] clamp_d_v = clamp_d_a
    cdef unsigned char[::1] clamp_alpha_v = clamp_alpha_a
    cdef unsigned char[::1] clamp_u_v = clamp_u_a

    cdef unsigned long long seed_u = <unsigned long long>(int(seed) & ((1 << 64) - 1))
    cdef long n_t = tx.shape[0]
    cdef long n_m = amp.shape[0]
    cdef bint unbounded = isnan(u_max)

    cdef double beta = exp(-h * dt)
    cdef double x = x0, y = y0, th = th0
    cdef double w = 0.0, xi = 0.0
    cdef long rec = 0, fail_step = -1
    cdef long k, i, ni
    cdef double t, d_true, d_meas, dx, dy, di, u1, u2
    cdef double r, rd, rdd, a_, om_, ph_, arg, s_, c_
    cdef double d_used, a2, alpha, e1, st, va, u
    cdef double eta, phi, thm, the
    cdef double k1x, k1y, k2x, k2y, k3x, k3y, k4x, k4y
    cdef bint clamped_d, clamped_alpha, clamped_u
    cdef unsigned long long z1m, z2m

    with nogil:
        for k in range(n_steps + 1):
            t = k * dt

            # nearest range; ties keep the lowest index
            d_true = INFINITY
            ni = 0
            for i in range(n_t):
                dx = x - tx[i]
                dy = y - ty[i]
                di = sqrt(dx * dx + dy * dy)
                if di < d_true:
                    d_true = di
                    ni = i

            if sigma > 0.0:
                z1m = _sm64(seed_u, <unsigned long long>(2 * k))
                z2m = _sm64(seed_u, <unsigned long long>(2 * k + 1))
                u1 = (<double>(z1m >> 11) + 0.5) * INV_2_53
                u2 = (<double>(z2m >> 11) + 0.5) * INV_2_53
                d_meas = d_true + sigma * (sqrt(-2.0 * log(u1)) * cos(TWO_PI * u2))
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
            for i in range(n_m):
                a_ = amp[i]
                om_ = om[i]
                ph_ = ph[i]
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
                dy = y - ty[ni]
                dx = x - tx[ni]
                eta = atan2(dy, dx)
                phi = th - eta
                phi = fmod(phi, TWO_PI)
                if phi > PI:
                    phi -= TWO_PI
                elif phi <= -PI:
                    phi += TWO_PI
                t_v[rec] = t
                x_v[rec] = x
                y_v[rec] = y
                theta_v[rec] = th
                d_true_v[rec] = d_true
                d_meas_v[rec] = d_meas
                xi_v[rec] = xi
                u_v[rec] = u
                r_v[rec] = r
                r_dot_v[rec] = rd
                e1_v[rec] = e1
                phi_v[rec] = phi
                clamp_d_v[rec] = 1 if clamped_d else 0
                clamp_alpha_v[rec] = 1 if clamped_alpha else 0
                clamp_u_v[rec] = 1 if clamped_u else 0
                rec += 1

            if k < n_steps:
                # RK4 with u held; keep in lockstep with plant.step
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
                th = fmod(th, TWO_PI)
                if th > PI:
                    th -= TWO_PI
                elif th <= -PI:
                    th += TWO_PI
                if not (isfinite(x) and isfinite(y) and isfinite(th)):
                    fail_step = k
                    break

    return {
        "t": t_a,
        "x": x_a,
        "y": y_a,
        "theta": theta_a,
        "d_true": d_true_a,
        "d_meas": d_meas_a,
        "xi": xi_a,
        "u": u_a,
        "r": r_a,
        "r_dot": r_dot_a,
        "e1": e1_a,
        "phi": phi_a,
        "clamp_d": clamp_d_a,
        "clamp_alpha": clamp_alpha_a,
        "clamp_u": clamp_u_a,
        "fail_step": fail_step,
        "n_records": rec,
    }
