"""Range-only backstepping steering law.

Computes the heading-rate command from the measured range, the filtered
range rate, and the commanded distance profile:

    u = vc*a/d + (k1*(xi - r_dot + k2*sat((d - r)/k3)) - r_ddot) / (vc*a)

where a = sqrt(max(vc^2 - xi^2, 0))/vc is the magnitude of the heading
error sine recovered from the range rate, floored at eps2, and d is the
measured range floored at eps1. The saturation keeps one fixed gain set
valid from any initial distance. On the commanded orbit (d = rc,
xi = 0) the law outputs exactly vc/rc, so there is no steady-state
error by construction.

All clamp events are surfaced in :class:`ControlDiag` so tests and logs
can assert when the safeguards are active. Keep the arithmetic in
lockstep with the simulation kernels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .signals import RefSample


@dataclass(frozen=True)
class ControllerParams:
    """Gain set for the steering law.

    vc     forward speed (m/s), > 0
    k1     rate-loop gain (1/s), > 0
    k2     approach speed (m/s), > 0; the constant-command stability
           condition additionally needs k2 < vc
    k3     saturation half-width (m), > 0
    eps1   range floor (m), > 0
    eps2   floor on the heading-error sine magnitude, in (0, 1)
    u_max  optional symmetric heading-rate bound (rad/s), > 0
    """

    vc: float
    k1: float
    k2: float
    k3: float
    eps1: float = 0.01
    eps2: float = 0.01
    u_max: float | None = None

    def __post_init__(self):
        for name in ("vc", "k1", "k2", "k3", "eps1", "eps2"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0.0):
                raise ValueError(f"{name} must be finite and > 0, got {v}")
        if not self.eps2 < 1.0:
            raise ValueError(f"eps2 must be < 1, got {self.eps2}")
        if self.u_max is not None and not (math.isfinite(self.u_max) and self.u_max > 0.0):
            raise ValueError(f"u_max must be finite and > 0, got {self.u_max}")


@dataclass(frozen=True)
class ControlDiag:
    """Per-call diagnostics: error terms and which safeguards fired."""

    alpha: float
    e1: float
    e2: float
    s: float
    sat_arg: float
    clamped_d: bool
    clamped_alpha: bool
    clamped_u: bool


def sat(eta: float) -> float:
    """Unit saturation: identity inside (-1, 1), sign outside."""
    if eta > 1.0:
        return 1.0
    if eta < -1.0:
        return -1.0
    return eta


def compute_alpha(xi: float, vc: float, eps2: float) -> float:
    """Heading-error sine magnitude from the range rate, floored at eps2.

    Noise can push |xi| above vc; the inner max keeps the square root
    real and the floor then applies.
    """
    a2 = vc * vc - xi * xi
    alpha = math.sqrt(a2) / vc if a2 > 0.0 else 0.0
    if alpha <= eps2:
        alpha = eps2
    return alpha


def compute_u(
    d_meas: float, xi: float, ref: RefSample, p: ControllerParams
) -> tuple[float, ControlDiag]:
    """Steering command for a general (twice-differentiable) profile."""
    if not (math.isfinite(d_meas) and math.isfinite(xi)):
        raise ValueError(f"inputs must be finite, got d={d_meas}, xi={xi}")

    clamped_d = d_meas <= p.eps1
    d_used = p.eps1 if clamped_d else d_meas

    a2 = p.vc * p.vc - xi * xi
    alpha = math.sqrt(a2) / p.vc if a2 > 0.0 else 0.0
    clamped_alpha = alpha <= p.eps2
    if clamped_alpha:
        alpha = p.eps2

    e1 = d_used - ref.r
    sat_arg = e1 / p.k3
    st = sat(sat_arg)

    va = p.vc * alpha
    u = va / d_used + (p.k1 * ((xi - ref.r_dot) + p.k2 * st) - ref.r_ddot) / va

    clamped_u = False
    if p.u_max is not None:
        if u > p.u_max:
            u = p.u_max
            clamped_u = True
        elif u < -p.u_max:
            u = -p.u_max
            clamped_u = True

    if not math.isfinite(u):
        raise ArithmeticError(f"steering command is not finite: {u}")

    s = -(p.k2 * st) + ref.r_dot
    diag = ControlDiag(
        alpha=alpha,
        e1=e1,
        e2=xi - s,
        s=s,
        sat_arg=sat_arg,
        clamped_d=clamped_d,
        clamped_alpha=clamped_alpha,
        clamped_u=clamped_u,
    )
    return u, diag


def compute_u_constant(
    d_meas: float, xi: float, rc: float, p: ControllerParams
) -> tuple[float, ControlDiag]:
    """Steering command for a constant commanded radius rc.

    A distinct entry point for the circular-orbit path; agrees bitwise
    with :func:`compute_u` at ref = (rc, 0, 0) because the derivative
    feedforward terms vanish identically.
    """
    return compute_u(d_meas, xi, RefSample(rc, 0.0, 0.0), p)


@dataclass(frozen=True)
class ConditionItem:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of a parameter-condition check, one item per inequality."""

    kind: str
    items: tuple[ConditionItem, ...]

    @property
    def passed(self) -> bool:
        return all(it.passed for it in self.items)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "passed": self.passed,
            "items": [
                {"name": it.name, "passed": it.passed, "detail": it.detail}
                for it in self.items
            ],
        }


def check_constant_conditions(p: ControllerParams, rc: float) -> ConditionReport:
    """Gain conditions for converging to a constant radius: 0 < k2 < vc
    and k3 = rc."""
    items = (
        ConditionItem(
            "k2_below_vc",
            0.0 < p.k2 < p.vc,
            f"0 < k2={p.k2} < vc={p.vc}",
        ),
        ConditionItem(
            "k3_equals_rc",
            math.isclose(p.k3, rc, rel_tol=1e-9, abs_tol=0.0),
            f"k3={p.k3} == rc={rc}",
        ),
    )
    return ConditionReport(kind="constant", items=items)


def check_timevarying_conditions(
    p: ControllerParams, rv: float, ra: float
) -> ConditionReport:
    """Gain conditions for tracking a time-varying profile with
    |r_dot| <= rv and |r_ddot| <= ra."""
    items = (
        ConditionItem(
            "k1_above_k2_over_k3",
            p.k1 > p.k2 / p.k3,
            f"k1={p.k1} > k2/k3={p.k2 / p.k3}",
        ),
        ConditionItem(
            "rate_margin",
            p.k1 * (p.vc - p.k2 - rv) > ra,
            f"k1*(vc-k2-rv)={p.k1 * (p.vc - p.k2 - rv)} > ra={ra}",
        ),
        ConditionItem(
            "speed_margin",
            p.k1 * (p.vc * p.vc - rv * rv) > rv * ra,
            f"k1*(vc^2-rv^2)={p.k1 * (p.vc * p.vc - rv * rv)} > rv*ra={rv * ra}",
        ),
    )
    return ConditionReport(kind="timevarying", items=items)
