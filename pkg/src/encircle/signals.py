"""Reference distance commands r(t) with exact first and second derivatives.

A command is either a positive constant, an offset sinusoid, or a finite
sum of commands. Derivatives are closed-form, never numerical: the
steering law feeds forward both r_dot and r_ddot, so derivative noise
would enter the loop directly.

Every command flattens to ``(base, terms)`` where ``terms`` is a tuple of
``(amplitude, omega, phase)`` sinusoid triples. Evaluation always goes
through this flattened form, in term order, so that the simulation
kernels and this module produce bitwise identical samples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class RefSample:
    """Command value and its first two time derivatives at one instant."""

    r: float
    r_dot: float
    r_ddot: float


class RefCommand:
    """Base class for distance commands. Immutable; safe to share."""

    def flatten(self) -> tuple[float, tuple[tuple[float, float, float], ...]]:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def min_lower_bound(self) -> float:
        """Guaranteed lower bound on r(t): base minus the sum of amplitudes.

        Conservative for multi-tone sums whose troughs never align.
        """
        base, terms = self.flatten()
        return base - sum(a for a, _, _ in terms)

    def ensure_positive(self) -> None:
        """Reject commands whose guaranteed lower bound is not positive.

        The tracked distance must stay positive, so a command that can
        reach zero is not trackable.
        """
        lb = self.min_lower_bound()
        if not lb > 0.0:
            raise ValueError(
                f"command lower bound {lb} is not positive; the commanded "
                "distance must stay strictly positive"
            )


@dataclass(frozen=True)
class Constant(RefCommand):
    """Fixed commanded distance; derivatives are exactly zero."""

    rc: float

    def __post_init__(self):
        if not (math.isfinite(self.rc) and self.rc > 0.0):
            raise ValueError(f"constant command must be finite and > 0, got {self.rc}")

    def flatten(self):
        return (self.rc, ())

    def to_dict(self):
        return {"type": "constant", "rc": self.rc}


@dataclass(frozen=True)
class Sinusoid(RefCommand):
    """offset + amplitude * sin(omega * t + phase)."""

    offset: float
    amplitude: float
    omega: float
    phase: float = 0.0

    def __post_init__(self):
        vals = (self.offset, self.amplitude, self.omega, self.phase)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"sinusoid parameters must be finite, got {vals}")
        if self.amplitude < 0.0:
            raise ValueError("amplitude must be >= 0; fold signs into the phase")

    def flatten(self):
        return (self.offset, ((self.amplitude, self.omega, self.phase),))

    def to_dict(self):
        return {
            "type": "sinusoid",
            "offset": self.offset,
            "amplitude": self.amplitude,
            "omega": self.omega,
            "phase": self.phase,
        }


@dataclass(frozen=True)
class Sum(RefCommand):
    """Pointwise sum of member commands, in order."""

    members: tuple[RefCommand, ...]

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if len(self.members) == 0:
            raise ValueError("sum command needs at least one member")
        for m in self.members:
            if not isinstance(m, RefCommand):
                raise TypeError(f"sum member is not a command: {m!r}")

    def flatten(self):
        base = 0.0
        terms: tuple[tuple[float, float, float], ...] = ()
        for m in self.members:
            mb, mt = m.flatten()
            base = base + mb
            terms = terms + mt
        return (base, terms)

    def to_dict(self):
        return {"type": "sum", "terms": [m.to_dict() for m in self.members]}


def evaluate(cmd: RefCommand, t: float) -> RefSample:
    """Sample the command and its first two derivatives at time t.

    Keep the loop below in lockstep with the simulation kernels.
    """
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t}")
    base, terms = cmd.flatten()
    r = base
    rd = 0.0
    rdd = 0.0
    for a, om, ph in terms:
        arg = om * t + ph
        s = math.sin(arg)
        c = math.cos(arg)
        r = r + a * s
        rd = rd + (a * om) * c
        rdd = rdd - ((a * om) * om) * s
    return RefSample(r, rd, rdd)


def bounds(cmd: RefCommand) -> tuple[float, float]:
    """Sup-norm bounds (rv, ra) on |r_dot| and |r_ddot|.

    Exact for constants and single sinusoids. For sums the triangle
    inequality is used, which can be loose when the member extrema never
    align; loose bounds only make the tracking conditions more cautious.
    """
    _, terms = cmd.flatten()
    rv = 0.0
    ra = 0.0
    for a, om, _ in terms:
        rv += a * abs(om)
        ra += (a * om) * om
    return (rv, ra)


def command_from_dict(obj: dict) -> RefCommand:
    """Parse a command from its tagged-dict form (see ``to_dict``)."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise ValueError(f"command must be an object with a 'type' tag, got {obj!r}")
    kind = obj["type"]
    if kind == "constant":
        _require_keys(obj, {"type", "rc"})
        return Constant(float(obj["rc"]))
    if kind == "sinusoid":
        _require_keys(obj, {"type", "offset", "amplitude", "omega"}, optional={"phase"})
        return Sinusoid(
            float(obj["offset"]),
            float(obj["amplitude"]),
            float(obj["omega"]),
            float(obj.get("phase", 0.0)),
        )
    if kind == "sum":
        _require_keys(obj, {"type", "terms"})
        terms = obj["terms"]
        if not isinstance(terms, list) or not terms:
            raise ValueError("sum command needs a non-empty 'terms' list")
        return Sum(tuple(command_from_dict(m) for m in terms))
    raise ValueError(f"unknown command type {kind!r}")


def _require_keys(obj: dict, required: set, optional: set = frozenset()):
    missing = required - obj.keys()
    if missing:
        raise ValueError(f"command missing keys {sorted(missing)}")
    unknown = obj.keys() - required - optional
    if unknown:
        raise ValueError(f"command has unknown keys {sorted(unknown)}")
