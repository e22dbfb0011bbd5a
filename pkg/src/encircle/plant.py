"""Unicycle plant: world-frame kinematics and range sensing.

The robot moves at constant forward speed with a commanded heading rate.
Integration is one classical RK4 step per control period with the
heading rate held constant over the step. Range measurements return the
distance to the nearest of one or more stationary targets, optionally
corrupted by seeded white Gaussian noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import rng
from .analysis import PolarState

_PI = math.pi
_TWO_PI = 6.283185307179586


def wrap_angle(a: float) -> float:
    """Wrap an angle into (-pi, pi]."""
    a = math.fmod(a, _TWO_PI)
    if a > _PI:
        a -= _TWO_PI
    elif a <= -_PI:
        a += _TWO_PI
    return a


@dataclass(frozen=True)
class RobotState:
    """World-frame pose. Heading is stored wrapped into (-pi, pi]."""

    x: float
    y: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y) and math.isfinite(self.theta)):
            raise ValueError(f"robot state must be finite, got {(self.x, self.y, self.theta)}")
        object.__setattr__(self, "theta", wrap_angle(self.theta))


@dataclass(frozen=True)
class TargetSet:
    """Ordered, non-empty collection of stationary target positions."""

    points: tuple[tuple[float, float], ...]

    def __post_init__(self):
        pts = tuple((float(p[0]), float(p[1])) for p in self.points)
        if len(pts) == 0:
            raise ValueError("target set must be non-empty")
        for p in pts:
            if not (math.isfinite(p[0]) and math.isfinite(p[1])):
                raise ValueError(f"target position must be finite, got {p}")
        object.__setattr__(self, "points", pts)

    def as_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        arr = np.asarray(self.points, dtype=np.float64)
        return np.ascontiguousarray(arr[:, 0]), np.ascontiguousarray(arr[:, 1])


@dataclass(frozen=True)
class NoiseModel:
    """Additive white Gaussian range noise, reproducible by seed.

    Identical seeds give bitwise identical noise sequences; draws are
    addressed by step counter (see :mod:`encircle.rng`).
    """

    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not (math.isfinite(self.sigma) and self.sigma >= 0.0):
            raise ValueError(f"sigma must be finite and >= 0, got {self.sigma}")
        if not isinstance(self.seed, int):
            raise ValueError(f"seed must be an integer, got {self.seed!r}")


def step(state: RobotState, u: float, vc: float, dt: float) -> RobotState:
    """Advance the unicycle one RK4 step with u held constant.

    Keep the arithmetic in lockstep with the simulation kernels. The two
    midpoint stages coincide because the heading rate does not depend on
    the state, so the heading advances by exactly u*dt.
    """
    if not math.isfinite(u):
        raise ValueError(f"heading rate must be finite, got {u}")
    if not (math.isfinite(dt) and dt > 0.0):
        raise ValueError(f"dt must be finite and > 0, got {dt}")
    if not (math.isfinite(vc) and vc > 0.0):
        raise ValueError(f"vc must be finite and > 0, got {vc}")
    x, y, th = state.x, state.y, state.theta
    k1x = vc * math.cos(th)
    k1y = vc * math.sin(th)
    thm = th + 0.5 * dt * u
    k2x = vc * math.cos(thm)
    k2y = vc * math.sin(thm)
    k3x = k2x
    k3y = k2y
    the = th + dt * u
    k4x = vc * math.cos(the)
    k4y = vc * math.sin(the)
    x = x + (dt / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    y = y + (dt / 6.0) * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
    th = wrap_angle(th + dt * u)
    return RobotState(x, y, th)


def min_distance(state: RobotState, targets: TargetSet) -> tuple[float, int]:
    """Distance to the nearest target and its index (lowest index on ties)."""
    best = math.inf
    ni = 0
    for i, (tx, ty) in enumerate(targets.points):
        dx = state.x - tx
        dy = state.y - ty
        di = math.sqrt(dx * dx + dy * dy)
        if di < best:
            best = di
            ni = i
    return best, ni


def measure(state: RobotState, targets: TargetSet, noise: NoiseModel, k: int) -> float:
    """Range measurement at draw counter k: nearest distance plus noise.

    With sigma = 0 the exact nearest distance is returned and no draw is
    consumed conceptually (draws are counter-addressed, so the sequence
    is unaffected either way).
    """
    d, _ = min_distance(state, targets)
    if noise.sigma > 0.0:
        d = d + noise.sigma * rng.gauss(noise.seed & ((1 << 64) - 1), k)
    return d


def true_polar(state: RobotState, target: tuple[float, float]) -> PolarState:
    """Ground-truth target-relative coordinates (d, phi, eta).

    eta is the bearing of the robot as seen from the target, measured
    from the +x axis; phi is the heading error theta - eta wrapped into
    (-pi, pi]. Raises if the robot sits exactly on the target.
    """
    dx = state.x - float(target[0])
    dy = state.y - float(target[1])
    d = math.sqrt(dx * dx + dy * dy)
    if d == 0.0:
        raise ValueError("robot coincides with the target; polar angles undefined")
    eta = math.atan2(dy, dx)
    phi = wrap_angle(state.theta - eta)
    return PolarState(d=d, phi=phi, eta=eta)
