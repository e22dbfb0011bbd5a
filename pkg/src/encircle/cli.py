"""Command-line front end.

    encircle run <cfg> [--out DIR] [--seed N] [--dt X]
    encircle sweep <cfg> --param NAME --values CSVLIST [--out DIR]
    encircle check <cfg>

Scenario configs are strict JSON documents (unknown keys are rejected)
and double as the reproducibility artifact: archive them next to the
outputs. `run` writes <stem>_trajectory.csv and <stem>_analysis.json;
`sweep` writes <stem>_sweep_<param>.csv. The default output directory is
$ENCIRCLE_OUT, falling back to the current directory.

Exit codes are the only process-level contract:
    0  success (check: all conditions hold)
    1  check found a failing condition
    2  configuration error (no outputs are written)
    3  numerical abort during simulation
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from . import analysis, signals
from .controller import ControllerParams
from .harness import NumericalDivergenceError, Scenario, run, run_batch
from .plant import NoiseModel, RobotState, TargetSet


class ConfigError(ValueError):
    """Configuration file is malformed or inconsistent."""


_TOP_KEYS = {"name", "initial_state", "targets", "command", "params", "noise",
             "dt", "t_end", "log_every"}
_TOP_REQUIRED = {"initial_state", "targets", "command", "params"}
_STATE_KEYS = {"x", "y", "theta"}
_PARAM_KEYS = {"vc", "k1", "k2", "k3", "h", "eps1", "eps2", "u_max"}
_PARAM_REQUIRED = {"vc", "k1", "k2", "k3", "h"}
_NOISE_KEYS = {"sigma", "seed"}


def _reject_unknown(obj: dict, allowed: set, where: str) -> None:
    unknown = obj.keys() - allowed
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in {where}")


def _number(obj: dict, key: str, where: str) -> float:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {v!r}")
    return float(v)


def load_config(path: str) -> dict:
    try:
        with open(path) as f:
            return json.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def scenario_from_config(cfg: dict, *, name: str = "",
                         seed_override: int | None = None,
                         dt_override: float | None = None) -> Scenario:
    """Validate a config document and build the scenario it describes."""
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    _reject_unknown(cfg, _TOP_KEYS, "config")
    missing = _TOP_REQUIRED - cfg.keys()
    if missing:
        raise ConfigError(f"config missing keys {sorted(missing)}")

    st = cfg["initial_state"]
    if not isinstance(st, dict):
        raise ConfigError("initial_state must be an object with x, y, theta")
    _reject_unknown(st, _STATE_KEYS, "initial_state")
    if st.keys() != _STATE_KEYS:
        raise ConfigError(f"initial_state needs exactly keys {sorted(_STATE_KEYS)}")

    tgts = cfg["targets"]
    if (not isinstance(tgts, list) or not tgts
            or not all(isinstance(p, list) and len(p) == 2 for p in tgts)):
        raise ConfigError("targets must be a non-empty list of [x, y] pairs")

    pr = cfg["params"]
    if not isinstance(pr, dict):
        raise ConfigError("params must be an object")
    _reject_unknown(pr, _PARAM_KEYS, "params")
    missing = _PARAM_REQUIRED - pr.keys()
    if missing:
        raise ConfigError(f"params missing keys {sorted(missing)}")

    noise_cfg = cfg.get("noise", {"sigma": 0.0, "seed": 0})
    if not isinstance(noise_cfg, dict):
        raise ConfigError("noise must be an object")
    _reject_unknown(noise_cfg, _NOISE_KEYS, "noise")

    try:
        command = signals.command_from_dict(cfg["command"])
        u_max = pr.get("u_max")
        if u_max is not None:
            u_max = _number(pr, "u_max", "params")
        params = ControllerParams(
            vc=_number(pr, "vc", "params"),
            k1=_number(pr, "k1", "params"),
            k2=_number(pr, "k2", "params"),
            k3=_number(pr, "k3", "params"),
            eps1=_number(pr, "eps1", "params") if "eps1" in pr else 0.01,
            eps2=_number(pr, "eps2", "params") if "eps2" in pr else 0.01,
            u_max=u_max,
        )
        seed = noise_cfg.get("seed", 0)
        if seed_override is not None:
            seed = seed_override
        if isinstance(seed, bool) or not isinstance(seed, int):
            raise ConfigError(f"noise.seed must be an integer, got {seed!r}")
        sigma = noise_cfg.get("sigma", 0.0)
        if isinstance(sigma, bool) or not isinstance(sigma, (int, float)):
            raise ConfigError(f"noise.sigma must be a number, got {sigma!r}")
        dt = cfg.get("dt", 0.01)
        if dt_override is not None:
            dt = dt_override
        t_end = cfg.get("t_end")
        log_every = cfg.get("log_every", 1)
        return Scenario(
            initial_state=RobotState(
                _number(st, "x", "initial_state"),
                _number(st, "y", "initial_state"),
                _number(st, "theta", "initial_state"),
            ),
            targets=TargetSet(tuple((float(p[0]), float(p[1])) for p in tgts)),
            command=command,
            params=params,
            h=_number(pr, "h", "params"),
            noise=NoiseModel(sigma=float(sigma), seed=seed),
            dt=float(dt),
            t_end=None if t_end is None else float(t_end),
            log_every=int(log_every),
            name=name or cfg.get("name", ""),
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def _out_dir(flag_value: str | None) -> str:
    out = flag_value or os.environ.get("ENCIRCLE_OUT") or "."
    os.makedirs(out, exist_ok=True)
    return out


def _stem(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
        sc = scenario_from_config(
            cfg, name=_stem(args.config),
            seed_override=args.seed, dt_override=args.dt,
        )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        log = run(sc)
    except NumericalDivergenceError as exc:
        print(f"numerical abort: {exc}", file=sys.stderr)
        return 3
    report = analysis.analyze(log)
    out = _out_dir(args.out)
    stem = _stem(args.config)
    csv_path = os.path.join(out, f"{stem}_trajectory.csv")
    json_path = os.path.join(out, f"{stem}_analysis.json")
    log.to_csv(csv_path)
    with open(json_path, "w") as f:
        json.dump({"meta": log.meta, "analysis": report.to_dict()}, f, indent=2)
    print(f"{sc.name or stem}: {len(log)} records -> {csv_path}, {json_path}")
    return 0


_SWEEPABLE = {
    "k1": ("params", "k1"), "k2": ("params", "k2"), "k3": ("params", "k3"),
    "vc": ("params", "vc"), "h": ("params", "h"), "u_max": ("params", "u_max"),
    "sigma": ("noise", "sigma"), "seed": ("noise", "seed"), "dt": (None, "dt"),
    "t_end": (None, "t_end"), "initial_state": (None, "initial_state"),
}


def _apply_sweep_value(cfg: dict, param: str, token: str) -> dict:
    import copy

    out = copy.deepcopy(cfg)
    section, key = _SWEEPABLE[param]
    if param == "initial_state":
        parts = token.split(":")
        if len(parts) != 3:
            raise ConfigError(
                f"initial_state sweep values must be x:y:theta triples, got {token!r}"
            )
        out["initial_state"] = {
            "x": float(parts[0]), "y": float(parts[1]), "theta": float(parts[2])
        }
        return out
    value: float | int = int(token) if param == "seed" else float(token)
    if section is None:
        out[key] = value
    else:
        out.setdefault(section, {})[key] = value
    return out


def cmd_sweep(args) -> int:
    try:
        if args.param not in _SWEEPABLE:
            raise ConfigError(
                f"cannot sweep {args.param!r}; choose from {sorted(_SWEEPABLE)}"
            )
        tokens = [tok for tok in args.values.split(",") if tok.strip()]
        if not tokens:
            raise ConfigError("empty sweep value list")
        cfg = load_config(args.config)
        scenarios = []
        for tok in tokens:
            sub = _apply_sweep_value(cfg, args.param, tok.strip())
            scenarios.append(
                scenario_from_config(sub, name=f"{args.param}={tok.strip()}")
            )
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    results = run_batch(scenarios)
    out = _out_dir(args.out)
    path = os.path.join(out, f"{_stem(args.config)}_sweep_{args.param}.csv")
    with open(path, "w") as f:
        f.write("param,value,status,t1,settle_time,steady_state_error,rho_hat,oscillation\n")
        for tok, res in zip(tokens, results):
            if not res.ok:
                f.write(f"{args.param},{tok.strip()},error:{res.error},,,,,\n")
                continue
            rep = res.report
            t1 = rep.phases.t1 if rep.phases is not None else None
            fmt = lambda v: "" if v is None else f"{v:.17g}"
            f.write(
                f"{args.param},{tok.strip()},ok,{fmt(t1)},{fmt(rep.settle_time)},"
                f"{fmt(rep.steady_state_error)},{fmt(rep.rho_hat)},"
                f"{int(rep.oscillation_flag)}\n"
            )
            print(
                f"{args.param}={tok.strip()}: settle={rep.settle_time} "
                f"rho_hat={rep.rho_hat} oscillation={rep.oscillation_flag}"
            )
    print(f"sweep summary -> {path}")
    return 0


def cmd_check(args) -> int:
    try:
        cfg = load_config(args.config)
        sc = scenario_from_config(cfg, name=_stem(args.config))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    from .controller import check_constant_conditions, check_timevarying_conditions

    base, terms = sc.command.flatten()
    if len(terms) == 0:
        report = check_constant_conditions(sc.params, base)
    else:
        rv, ra = signals.bounds(sc.command)
        report = check_timevarying_conditions(sc.params, rv, ra)
        print(f"derivative bounds: rv={rv:.6g}, ra={ra:.6g}")
    for item in report.items:
        print(f"  [{'ok' if item.passed else 'FAIL'}] {item.name}: {item.detail}")
    print(f"verdict: {'pass' if report.passed else 'fail'}")
    return 0 if report.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="encircle",
        description="Range-only target encirclement simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="simulate one scenario config")
    p_run.add_argument("config", help="path to a scenario JSON file")
    p_run.add_argument("--out", default=None, help="output directory (default $ENCIRCLE_OUT or .)")
    p_run.add_argument("--seed", type=int, default=None, help="override the noise seed")
    p_run.add_argument("--dt", type=float, default=None, help="override the step size")
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run the scenario once per parameter value")
    p_sweep.add_argument("config", help="path to a scenario JSON file")
    p_sweep.add_argument("--param", required=True, help="parameter to sweep")
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values (x:y:theta triples for initial_state)")
    p_sweep.add_argument("--out", default=None, help="output directory")
    p_sweep.set_defaults(func=cmd_sweep)

    p_check = sub.add_parser("check", help="evaluate gain conditions without running")
    p_check.add_argument("config", help="path to a scenario JSON file")
    p_check.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
