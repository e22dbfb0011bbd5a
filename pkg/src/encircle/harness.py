"""Closed-loop scenario runner: plant + estimator + steering law with
fixed-step timing, seeded noise, structured logging, and batch and
stress-test drivers.

A scenario is fully deterministic: running it twice produces bitwise
identical logs. The controller and the measurement run at the
integration rate (no multi-rate scheduling), and noise is drawn once
per step with the measured range held through the RK4 stages.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field, asdict

import numpy as np

from . import analysis, signals
from ._kernel import BACKEND, run_loop
from .controller import (
    ControllerParams,
    check_constant_conditions,
    check_timevarying_conditions,
)
from .plant import NoiseModel, RobotState, TargetSet

# CSV column order; the header below is a stable external contract.
COLUMNS = (
    "t", "x", "y", "theta", "d_true", "d_meas", "xi", "u", "r", "r_dot",
    "e1", "e2_true", "e2_filt", "phi", "V", "clamp_d", "clamp_alpha", "clamp_u",
)
CSV_HEADER = ",".join(COLUMNS)

_FLOAT_COLUMNS = COLUMNS[:15]
_FLAG_COLUMNS = COLUMNS[15:]


class NumericalDivergenceError(RuntimeError):
    """A simulated quantity became non-finite; carries the step index."""

    def __init__(self, step: int, t: float):
        super().__init__(f"non-finite value at step {step} (t={t:.6g} s)")
        self.step = step
        self.t = t


@dataclass(frozen=True)
class Scenario:
    """Everything needed to reproduce one closed-loop run."""

    initial_state: RobotState
    targets: TargetSet
    command: signals.RefCommand
    params: ControllerParams
    h: float = 100.0
    noise: NoiseModel = field(default_factory=NoiseModel)
    dt: float = 0.01
    t_end: float | None = None
    log_every: int = 1
    name: str = ""

    def __post_init__(self):
        if not (math.isfinite(self.h) and self.h > 0.0):
            raise ValueError(f"h must be finite and > 0, got {self.h}")
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError(f"dt must be finite and > 0, got {self.dt}")
        if self.t_end is not None and not self.t_end > self.dt:
            raise ValueError(f"t_end must exceed dt, got {self.t_end}")
        if not (isinstance(self.log_every, int) and self.log_every >= 1):
            raise ValueError(f"log_every must be an integer >= 1, got {self.log_every}")
        self.command.ensure_positive()

    def resolved_t_end(self) -> float:
        if self.t_end is not None:
            return self.t_end
        _, terms = self.command.flatten()
        # constant commands settle within 100 s at the shipped gain sets;
        # time-varying captures need the longer default horizon
        return 100.0 if len(terms) == 0 else 300.0


@dataclass
class TrajectoryLog:
    """Column-oriented record of one run plus scenario metadata.

    Float columns are float64 arrays of equal length with constant time
    spacing dt*log_every; clamp columns are uint8 (0/1). Serializes to
    CSV (17 significant digits, exact round trip) and to JSON lines.
    """

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    d_true: np.ndarray
    d_meas: np.ndarray
    xi: np.ndarray
    u: np.ndarray
    r: np.ndarray
    r_dot: np.ndarray
    e1: np.ndarray
    e2_true: np.ndarray
    e2_filt: np.ndarray
    phi: np.ndarray
    V: np.ndarray
    clamp_d: np.ndarray
    clamp_alpha: np.ndarray
    clamp_u: np.ndarray
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.t)

    def column(self, name: str) -> np.ndarray:
        if name not in COLUMNS:
            raise KeyError(name)
        return getattr(self, name)

    def to_csv(self, path_or_file) -> None:
        close = False
        if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
            f = open(path_or_file, "w", newline="")
            close = True
        else:
            f = path_or_file
        try:
            f.write(CSV_HEADER + "\n")
            cols = [self.column(c) for c in COLUMNS]
            for i in range(len(self)):
                parts = [f"{cols[j][i]:.17g}" for j in range(15)]
                parts += [str(int(cols[j][i])) for j in range(15, 18)]
                f.write(",".join(parts) + "\n")
        finally:
            if close:
                f.close()

    @classmethod
    def from_csv(cls, path_or_file) -> "TrajectoryLog":
        close = False
        if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
            f = open(path_or_file, "r", newline="")
            close = True
        else:
            f = path_or_file
        try:
            header = f.readline().strip()
            if header != CSV_HEADER:
                raise ValueError(f"unexpected CSV header: {header!r}")
            raw = np.loadtxt(f, delimiter=",", ndmin=2)
        finally:
            if close:
                f.close()
        if raw.shape[1] != len(COLUMNS):
            raise ValueError(f"expected {len(COLUMNS)} columns, got {raw.shape[1]}")
        kwargs = {name: np.ascontiguousarray(raw[:, i]) for i, name in enumerate(COLUMNS[:15])}
        for i, name in enumerate(_FLAG_COLUMNS, start=15):
            kwargs[name] = raw[:, i].astype(np.uint8)
        return cls(**kwargs, meta={})

    def to_jsonl(self, path_or_file) -> None:
        close = False
        if isinstance(path_or_file, (str, bytes)) or hasattr(path_or_file, "__fspath__"):
            f = open(path_or_file, "w")
            close = True
        else:
            f = path_or_file
        try:
            cols = [self.column(c) for c in COLUMNS]
            for i in range(len(self)):
                rec = {name: (float(cols[j][i]) if j < 15 else int(cols[j][i]))
                       for j, name in enumerate(COLUMNS)}
                f.write(json.dumps(rec) + "\n")
        finally:
            if close:
                f.close()


def run(sc: Scenario) -> TrajectoryLog:
    """Simulate one scenario and return the full log.

    Parameter-condition reports are attached to the log metadata but do
    not gate the run: out-of-condition gain studies are legitimate.
    """
    p = sc.params
    t_end = sc.resolved_t_end()
    n_steps = int(math.floor(t_end / sc.dt + 1e-9))

    base_r, terms = sc.command.flatten()
    amp = np.array([a for a, _, _ in terms], dtype=np.float64)
    om = np.array([o for _, o, _ in terms], dtype=np.float64)
    ph = np.array([q for _, _, q in terms], dtype=np.float64)
    tx, ty = sc.targets.as_arrays()

    if len(terms) == 0:
        conditions = check_constant_conditions(p, base_r).to_dict()
    else:
        rv, ra = signals.bounds(sc.command)
        conditions = check_timevarying_conditions(p, rv, ra).to_dict()

    res = run_loop(
        sc.initial_state.x,
        sc.initial_state.y,
        sc.initial_state.theta,
        tx,
        ty,
        base_r,
        amp,
        om,
        ph,
        p.vc,
        p.k1,
        p.k2,
        p.k3,
        p.eps1,
        p.eps2,
        math.nan if p.u_max is None else p.u_max,
        sc.h,
        sc.noise.sigma,
        sc.noise.seed,
        sc.dt,
        n_steps,
        sc.log_every,
    )
    if res["fail_step"] >= 0:
        k = int(res["fail_step"])
        raise NumericalDivergenceError(k, k * sc.dt)

    # diagnostic columns derived from the kernel outputs
    st = np.clip(res["e1"] / p.k3, -1.0, 1.0)
    s_virtual = -(p.k2 * st) + res["r_dot"]
    ddot_true = p.vc * np.cos(res["phi"])
    e2_true = ddot_true - s_virtual
    e2_filt = res["xi"] - s_virtual
    if len(terms) == 0:
        v = analysis.lyapunov_V3(res["d_true"], ddot_true, base_r, p)
    else:
        v = analysis.lyapunov_V4(res["d_true"], res["r"], e2_true, p)

    meta = {
        "name": sc.name,
        "params": {
            "vc": p.vc, "k1": p.k1, "k2": p.k2, "k3": p.k3,
            "eps1": p.eps1, "eps2": p.eps2, "u_max": p.u_max,
        },
        "h": sc.h,
        "command": sc.command.to_dict(),
        "command_base": base_r,
        "command_terms": [list(term) for term in terms],
        "targets": [list(pt) for pt in sc.targets.points],
        "initial_state": [sc.initial_state.x, sc.initial_state.y, sc.initial_state.theta],
        "sigma": sc.noise.sigma,
        "seed": sc.noise.seed,
        "dt": sc.dt,
        "t_end": t_end,
        "log_every": sc.log_every,
        "backend": BACKEND,
        "conditions": conditions,
    }
    return TrajectoryLog(
        t=res["t"], x=res["x"], y=res["y"], theta=res["theta"],
        d_true=res["d_true"], d_meas=res["d_meas"], xi=res["xi"], u=res["u"],
        r=res["r"], r_dot=res["r_dot"], e1=res["e1"],
        e2_true=e2_true, e2_filt=e2_filt, phi=res["phi"], V=np.asarray(v),
        clamp_d=res["clamp_d"], clamp_alpha=res["clamp_alpha"], clamp_u=res["clamp_u"],
        meta=meta,
    )


@dataclass
class BatchResult:
    """One entry of a batch run; exactly one of log/error is set."""

    name: str
    ok: bool
    log: TrajectoryLog | None = None
    report: analysis.AnalysisReport | None = None
    error: str | None = None


def run_batch(scenarios) -> list[BatchResult]:
    """Run scenarios independently, collecting per-scenario failures.

    Results keep the input order; a failed scenario yields an error
    entry and the batch continues.
    """
    results: list[BatchResult] = []
    for i, sc in enumerate(scenarios):
        name = sc.name or f"scenario_{i}"
        try:
            log = run(sc)
            results.append(BatchResult(name=name, ok=True, log=log, report=analysis.analyze(log)))
        except Exception as exc:  # collected, not raised: batch continues
            results.append(BatchResult(name=name, ok=False, error=f"{type(exc).__name__}: {exc}"))
    return results


@dataclass(frozen=True)
class EquilibriumEscape:
    d_star: float
    escaped: bool
    t_escape: float | None


@dataclass(frozen=True)
class InteriorEquilibriumReport:
    """Existence and instability check for interior stall points.

    With a strong enough gain product (k1*k2 >= 8*vc^2) the heading
    dynamics admit stall points at ranges d* inside the commanded
    radius where the heading error could freeze at -pi/2. They satisfy
    d^2 - rc*d + 2*rc*vc^2/(k1*k2) = 0; both roots in (0, rc) are
    reported and each is probed with a perturbed run that must escape.
    """

    condition_met: bool
    gain_product: float
    threshold: float
    roots: tuple[EquilibriumEscape, ...]
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "condition_met": self.condition_met,
            "gain_product": self.gain_product,
            "threshold": self.threshold,
            "roots": [
                {"d_star": r.d_star, "escaped": r.escaped, "t_escape": r.t_escape}
                for r in self.roots
            ],
            "note": self.note,
        }


def stress_interior_equilibrium(
    p: ControllerParams,
    rc: float,
    h: float = 100.0,
    dt: float = 0.01,
    t_max: float = 60.0,
    perturbation: float = 1e-3,
    escape_radius: float = 0.1,
) -> InteriorEquilibriumReport:
    """Locate interior stall points and confirm each is unstable.

    Each root d* is probed from (d* + perturbation, phi = -pi/2); escape
    means the (d, phi) distance from the stall point exceeds
    escape_radius within t_max.
    """
    gain_product = p.k1 * p.k2
    threshold = 8.0 * p.vc * p.vc
    if gain_product < threshold:
        return InteriorEquilibriumReport(
            condition_met=False,
            gain_product=gain_product,
            threshold=threshold,
            roots=(),
            note="no interior equilibrium: k1*k2 < 8*vc^2",
        )
    disc = rc * rc - 8.0 * rc * p.vc * p.vc / gain_product
    if disc < 0.0:
        return InteriorEquilibriumReport(
            condition_met=True,
            gain_product=gain_product,
            threshold=threshold,
            roots=(),
            note="no real stall radius in (0, rc)",
        )
    root = math.sqrt(disc)
    candidates = [(rc - root) / 2.0, (rc + root) / 2.0]
    escapes = []
    for d_star in candidates:
        if not 0.0 < d_star < rc:
            continue
        sc = Scenario(
            initial_state=RobotState(d_star + perturbation, 0.0, -math.pi / 2.0),
            targets=TargetSet(((0.0, 0.0),)),
            command=signals.Constant(rc),
            params=p,
            h=h,
            dt=dt,
            t_end=t_max,
        )
        log = run(sc)
        dphi = np.mod(log.phi - (-math.pi / 2.0) + math.pi, 2.0 * math.pi) - math.pi
        dist = np.sqrt((log.d_true - d_star) ** 2 + dphi ** 2)
        idx = np.nonzero(dist > escape_radius)[0]
        if idx.size:
            escapes.append(EquilibriumEscape(d_star, True, float(log.t[int(idx[0])])))
        else:
            escapes.append(EquilibriumEscape(d_star, False, None))
    return InteriorEquilibriumReport(
        condition_met=True,
        gain_product=gain_product,
        threshold=threshold,
        roots=tuple(escapes),
    )
