"""Closed-loop analysis: linearized error dynamics, Lyapunov diagnostics,
decay-rate fitting, and phase detection on logged trajectories.

Everything here is pure over immutable inputs; trajectory logs are only
read. Ground-truth quantities (true range, true range rate from the
heading error) are used for the theory-facing diagnostics so they test
the control law rather than the measurement filter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .controller import ControllerParams


@dataclass(frozen=True)
class PolarState:
    """Target-relative coordinates: range d, heading error phi, bearing eta."""

    d: float
    phi: float
    eta: float

    def __post_init__(self):
        if not self.d > 0.0:
            raise ValueError(f"range must be > 0, got {self.d}")


@dataclass(frozen=True)
class ErrorState:
    """Range tracking errors: z1 = d - r, z2 = d_dot - r_dot."""

    z1: float
    z2: float


@dataclass(frozen=True)
class LinearizationReport:
    """In-band error dynamics z' = A z and its spectrum.

    A = [[0, 1], [-k1*k2/k3, -k1]]. rho is the guaranteed exponential
    decay rate of ||z||; c_bound is the conditioning constant of the
    eigenvector basis (unit columns, 2-norm), absent in the defective
    critically-damped case.
    """

    a_matrix: tuple[tuple[float, float], tuple[float, float]]
    eigenvalues: tuple[complex, complex]
    rho: float
    delta: float
    hurwitz: bool
    c_bound: float | None

    def to_dict(self) -> dict:
        return {
            "A": [list(row) for row in self.a_matrix],
            "eigenvalues": [[ev.real, ev.imag] for ev in self.eigenvalues],
            "rho": self.rho,
            "delta": self.delta,
            "hurwitz": self.hurwitz,
            "C_bound": self.c_bound,
        }


class ShortWindowError(ValueError):
    """Raised when a fit window holds too few samples to be meaningful."""


def linearize(p: ControllerParams) -> LinearizationReport:
    """Spectrum and decay rate of the in-band error dynamics."""
    k1, k2, k3 = p.k1, p.k2, p.k3
    a10 = -(k1 * k2) / k3
    delta = k1 * k1 - 4.0 * k1 * k2 / k3
    if delta > 0.0:
        root = math.sqrt(delta)
        lam1 = complex((-k1 + root) / 2.0, 0.0)
        lam2 = complex((-k1 - root) / 2.0, 0.0)
        rho = (k1 - root) / 2.0
    elif delta == 0.0:
        lam1 = lam2 = complex(-k1 / 2.0, 0.0)
        rho = k1 / 2.0
    else:
        root = math.sqrt(-delta)
        lam1 = complex(-k1 / 2.0, root / 2.0)
        lam2 = complex(-k1 / 2.0, -root / 2.0)
        rho = k1 / 2.0
    hurwitz = lam1.real < 0.0 and lam2.real < 0.0

    c_bound = None
    if delta != 0.0:
        # Unit-column eigenvector basis of the companion form: (1, lam)/norm.
        q = np.array([[1.0, 1.0], [lam1, lam2]], dtype=complex)
        q /= np.linalg.norm(q, axis=0)
        c_bound = float(np.linalg.norm(q, 2) * np.linalg.norm(np.linalg.inv(q), 2))

    return LinearizationReport(
        a_matrix=((0.0, 1.0), (a10, -k1)),
        eigenvalues=(lam1, lam2),
        rho=rho,
        delta=delta,
        hurwitz=hurwitz,
        c_bound=c_bound,
    )


def phi_equilibrium(p: ControllerParams, ref=None) -> float:
    """Heading-error angle the loop rides at.

    With no reference sample, returns the far-field approach angle
    arccos(-k2/vc), defined only for k2 < vc. Given a reference sample,
    returns the tracking angle arccos(r_dot/vc) at which the range rate
    matches the commanded rate.
    """
    if ref is None:
        arg = -p.k2 / p.vc
        if not -1.0 < arg:
            raise ValueError(
                f"approach angle undefined: k2={p.k2} >= vc={p.vc}"
            )
        return math.acos(arg)
    arg = ref.r_dot / p.vc
    if not -1.0 <= arg <= 1.0:
        raise ValueError(f"tracking angle undefined: |r_dot|={abs(ref.r_dot)} > vc={p.vc}")
    return math.acos(arg)


def _sat_integral(a, k3):
    """Integral of sat(tau/k3) from 0 to a; even, piecewise closed form."""
    aa = np.abs(a)
    return np.where(aa <= k3, a * a / (2.0 * k3), k3 / 2.0 + (aa - k3))


def lyapunov_V3(x1, x2, rc: float, p: ControllerParams):
    """Orbit-capture energy: k1*k2 * int_rc^x1 sat((tau-rc)/k3) dtau + x2^2/2.

    Accepts scalars or arrays; the integral is evaluated in closed form.
    """
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    v = p.k1 * p.k2 * _sat_integral(x1 - rc, p.k3) + 0.5 * x2 * x2
    return float(v) if v.ndim == 0 else v


def lyapunov_V4(d, r, e2, p: ControllerParams):
    """Tracking energy for time-varying profiles.

    e2^2/2 plus (k2^3/k3) times the symmetric pair of saturation
    integrals between the range and the commanded range (the pair sums
    to twice the one-sided integral).
    """
    d = np.asarray(d, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    e2 = np.asarray(e2, dtype=np.float64)
    pair = 2.0 * _sat_integral(d - r, p.k3)
    v = (p.k2 ** 3 / p.k3) * pair + 0.5 * e2 * e2
    return float(v) if v.ndim == 0 else v


def error_trajectory(log) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(z1, z2, ||z||) along a log, from ground-truth range and range rate."""
    vc = log.meta["params"]["vc"]
    z1 = log.d_true - log.r
    z2 = vc * np.cos(log.phi) - log.r_dot
    return z1, z2, np.sqrt(z1 * z1 + z2 * z2)


def fit_decay_rate(log, t_start: float, floor: float = 1e-9, min_samples: int = 50) -> float:
    """Exponential decay rate of ||z|| fitted after t_start.

    Least-squares slope of ln||z|| against time, over [t_start, first
    time ||z|| drops below the floor). Returns the negated slope.
    """
    _, _, nrm = error_trajectory(log)
    t = log.t
    i0 = int(np.searchsorted(t, t_start))
    below = np.nonzero(nrm[i0:] < floor)[0]
    i1 = i0 + int(below[0]) if below.size else len(t)
    if i1 - i0 < min_samples:
        raise ShortWindowError(
            f"fit window [{t_start}, ...) holds {i1 - i0} samples; need {min_samples}"
        )
    slope = np.polyfit(t[i0:i1], np.log(nrm[i0:i1]), 1)[0]
    return float(-slope)


@dataclass(frozen=True)
class PhaseReport:
    """Landmark times of a capture run; absent phases are None.

    t1   entry into phi >= 0 that holds for the rest of the log
    t2   first upward crossing of phi = pi/2 after t1
    t3   start of a sustained dwell at the approach angle
    t4   downward crossing of the range through rc + k3
    mean_ddot_approach   average range rate over [t3, t4]
    phi_max_dev_approach max |phi - approach angle| over [t3, t4]
    """

    t1: float | None
    t2: float | None
    t3: float | None
    t4: float | None
    mean_ddot_approach: float | None
    phi_max_dev_approach: float | None
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "t1": self.t1,
            "t2": self.t2,
            "t3": self.t3,
            "t4": self.t4,
            "mean_ddot_approach": self.mean_ddot_approach,
            "phi_max_dev_approach": self.phi_max_dev_approach,
            "notes": list(self.notes),
        }


def _interp_crossing(t0, t1, v0, v1, level):
    return t0 + (level - v0) / (v1 - v0) * (t1 - t0)


def detect_phases(
    log,
    p: ControllerParams,
    rc: float,
    phi_tol: float = 0.02,
    dwell: float = 1.0,
    slack: float = 0.02,
) -> PhaseReport:
    """Detect the capture landmarks on a constant-radius run.

    t1 uses the lasting-entry definition: the first sample with
    phi >= 0 after which phi never drops below -slack again, so brief
    wrap excursions during the initial transient do not count.
    Crossings are linearly interpolated between samples; the dwell at
    the approach angle must hold phi within phi_tol for `dwell` seconds.
    """
    t = log.t
    phi = log.phi
    d = log.d_true
    notes: list[str] = []

    # t1: lasting entry into phi >= 0.
    suffix_min = np.minimum.accumulate(phi[::-1])[::-1]
    candidates = np.nonzero((phi >= 0.0) & (suffix_min >= -slack))[0]
    if candidates.size == 0:
        return PhaseReport(None, None, None, None, None, None, ("no lasting entry into phi >= 0",))
    i1 = int(candidates[0])
    if i1 == 0:
        t1 = float(t[0])
    elif phi[i1 - 1] < 0.0 and phi[i1] - phi[i1 - 1] <= math.pi:
        t1 = float(_interp_crossing(t[i1 - 1], t[i1], phi[i1 - 1], phi[i1], 0.0))
    else:
        t1 = float(t[i1])  # entry by a wrap jump; no interpolation
        notes.append("phi entered [0, pi] by a wrap jump")

    # t2: first continuous upward crossing of pi/2 at or after i1.
    t2 = None
    half_pi = math.pi / 2.0
    seg = np.nonzero(
        (phi[i1:-1] < half_pi)
        & (phi[i1 + 1:] >= half_pi)
        & (phi[i1 + 1:] - phi[i1:-1] <= math.pi)
    )[0]
    if seg.size:
        j = i1 + int(seg[0])
        t2 = float(_interp_crossing(t[j], t[j + 1], phi[j], phi[j + 1], half_pi))

    # t3: sustained dwell at the approach angle.
    t3 = None
    i3 = None
    try:
        phi_bar = phi_equilibrium(p)
    except ValueError:
        notes.append("approach angle undefined (k2 >= vc); t3 and t4 skipped")
        return PhaseReport(t1, t2, None, None, None, None, tuple(notes))
    inband = np.abs(phi - phi_bar) < phi_tol
    n_dwell = max(1, int(round(dwell / (t[1] - t[0])))) if len(t) > 1 else 1
    ok = np.nonzero(inband[i1:])[0]
    for j in ok:
        i = i1 + int(j)
        if bool(inband[i : i + n_dwell].all()) and i + n_dwell <= len(t):
            i3 = i
            t3 = float(t[i])
            break

    # t4: downward crossing of d through rc + k3.
    t4 = None
    i4 = None
    level = rc + p.k3
    seg = np.nonzero((d[:-1] > level) & (d[1:] <= level))[0]
    if seg.size:
        i4 = int(seg[0])
        t4 = float(_interp_crossing(t[i4], t[i4 + 1], d[i4], d[i4 + 1], level))

    mean_ddot = None
    phi_dev = None
    if t3 is not None and t4 is not None and t4 > t3:
        # Time-averaged range rate over the window equals the chord slope.
        d3 = float(np.interp(t3, t, d))
        mean_ddot = (level - d3) / (t4 - t3)
        sel = (t >= t3) & (t <= t4)
        phi_dev = float(np.max(np.abs(phi[sel] - phi_bar))) if sel.any() else None

    return PhaseReport(t1, t2, t3, t4, mean_ddot, phi_dev, tuple(notes))


def sign_changes(
    t: np.ndarray,
    values: np.ndarray,
    t_lo: float,
    t_hi: float,
    deadband: float = 1e-3,
) -> int:
    """Count strict sign alternations of `values` within [t_lo, t_hi].

    Samples inside the deadband are ignored so that numerical dust
    around zero after convergence does not register as oscillation.
    """
    sel = (t >= t_lo) & (t <= t_hi)
    v = values[sel]
    signs = np.where(v > deadband, 1, np.where(v < -deadband, -1, 0))
    signs = signs[signs != 0]
    if signs.size < 2:
        return 0
    return int(np.count_nonzero(np.diff(signs) != 0))


def settle_time(t: np.ndarray, err: np.ndarray, tol: float = 0.02) -> float | None:
    """First time after which |err| stays below tol to the end of the log."""
    above = np.nonzero(np.abs(err) >= tol)[0]
    if above.size == 0:
        return float(t[0])
    i = int(above[-1]) + 1
    if i >= len(t):
        return None
    return float(t[i])


def winding_number(px: float, py: float, xs: np.ndarray, ys: np.ndarray) -> float:
    """Signed turns of the polyline (xs, ys) around the point (px, py)."""
    ang = np.unwrap(np.arctan2(ys - py, xs - px))
    return float((ang[-1] - ang[0]) / (2.0 * math.pi))


def final_loop(log, center: tuple[float, float]) -> slice:
    """Index slice covering the last full revolution around `center`."""
    ang = np.unwrap(np.arctan2(log.y - center[1], log.x - center[0]))
    behind = np.nonzero(np.abs(ang - ang[-1]) >= 2.0 * math.pi)[0]
    if behind.size == 0:
        raise ValueError("trajectory does not complete a revolution around the center")
    return slice(int(behind[-1]), len(ang))


@dataclass(frozen=True)
class AnalysisReport:
    """Bundle of per-run analysis results, JSON-serializable."""

    linearization: LinearizationReport
    conditions: dict
    phases: PhaseReport | None
    rho_hat: float | None
    fit_window: tuple[float, float] | None
    oscillation_flag: bool
    rate_reversals: int
    settle_time: float | None
    steady_state_error: float | None
    notes: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "linearization": self.linearization.to_dict(),
            "conditions": self.conditions,
            "phases": self.phases.to_dict() if self.phases is not None else None,
            "rho_hat": self.rho_hat,
            "fit_window": list(self.fit_window) if self.fit_window else None,
            "oscillation": self.oscillation_flag,
            "rate_reversals": self.rate_reversals,
            "settle_time": self.settle_time,
            "steady_state_error": self.steady_state_error,
            "notes": list(self.notes),
        }


def analyze(log, fit_floor: float = 1e-6) -> AnalysisReport:
    """Standard per-run analysis used by the CLI and batch runner.

    The oscillation flag counts reversals of the ground-truth range rate
    over the run (deadband 0.05*vc): a gain set past the stable regime
    wrap-cycles the heading error, flipping the range rate dozens of
    times, while a proper gain set reverses it at most a few times
    during the initial swing.
    """
    p = ControllerParams(**log.meta["params"])
    notes: list[str] = []
    lin = linearize(p)

    cmd_terms = log.meta["command_terms"]
    constant = len(cmd_terms) == 0

    phases = None
    rc = log.meta["command_base"]
    if constant:
        phases = detect_phases(log, p, rc)

    z1, _, nrm = error_trajectory(log)
    t = log.t

    rho_hat = None
    window = None
    inband = np.nonzero(np.abs(z1) < p.k3)[0]
    if inband.size:
        t_start = float(t[int(inband[0])])
        try:
            rho_hat = fit_decay_rate(log, t_start, floor=fit_floor)
            below = np.nonzero(nrm < fit_floor)[0]
            t_stop = float(t[int(below[0])]) if below.size else float(t[-1])
            window = (t_start, t_stop)
        except ShortWindowError as exc:
            notes.append(str(exc))

    vc = p.vc
    ddot = vc * np.cos(log.phi)
    reversals = sign_changes(t, ddot, float(t[0]), float(t[-1]), deadband=0.05 * vc)
    oscillation = reversals >= 10

    st = settle_time(t, z1, tol=0.02)
    tail = max(1, int(0.9 * len(t)))
    sse = float(np.mean(np.abs(z1[tail:])))

    return AnalysisReport(
        linearization=lin,
        conditions=log.meta.get("conditions", {}),
        phases=phases,
        rho_hat=rho_hat,
        fit_window=window,
        oscillation_flag=oscillation,
        rate_reversals=reversals,
        settle_time=st,
        steady_state_error=sse,
        notes=tuple(notes),
    )
