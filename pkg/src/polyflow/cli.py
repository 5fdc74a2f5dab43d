"""Experiment runner: JSON config in, JSON summary (+ CSV trace) out.

Exit codes: 0 success, 1 audit/check failure, 2 configuration error.
Summaries serialize floats with Python's shortest round-trip repr, which
preserves all 17 significant digits of a double.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .domain_grid import (
    GridSpec,
    build_grid,
    identity_metric,
    induced_metric,
    orthonormal_frame,
)
from .energy import energy_report
from .errors import ConfigError, DegenerateImmersion, PolyflowError
from .examples import builtin_map, example_catalog
from .flow import FlowConfig, MetricPolicy, run_flow, theorem_probe
from .space_form import Model, SpaceFormSpec
from .verify import (
    first_variation_residual,
    pointwise_identity_audit,
    random_tangent_section,
    tension_variation_residual,
)

__all__ = ["ExperimentConfig", "load_config", "run", "main"]

ROUNDOFF_FLOOR = 1e-9  # FD residual level below which O(t^2) decay is vacuous


class Action(str, Enum):
    AUDIT = "Audit"
    ENERGIES = "Energies"
    FLOW = "Flow"
    VARIATION_CHECK = "VariationCheck"


@dataclass
class ExperimentConfig:
    target: SpaceFormSpec
    grid: GridSpec
    map_name: str
    map_params: dict
    action: Action
    flow: FlowConfig = None
    p_list: tuple = (2.0, 4.0)
    output_prefix: str = "polyflow_out"
    seed: int = 0
    raw: dict = field(default_factory=dict, repr=False)


def _reject_unknown(section: dict, allowed, where: str):
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigError(f"unknown keys {sorted(unknown)} in {where}")


def _need(section: dict, key: str, where: str):
    if key not in section:
        raise ConfigError(f"missing key {key!r} in {where}")
    return section[key]


def parse_config(data: dict) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    _reject_unknown(
        data,
        {"target", "grid", "initial_map", "action", "flow", "p_list",
         "output_prefix", "seed"},
        "config",
    )
    target_d = _need(data, "target", "config")
    _reject_unknown(target_d, {"c", "n", "model"}, "target")
    try:
        target = SpaceFormSpec(c=float(_need(target_d, "c", "target")),
                               n=int(_need(target_d, "n", "target")))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad target: {exc}") from exc
    if "model" in target_d and Model(target_d["model"]) is not target.model:
        raise ConfigError(
            f"model {target_d['model']!r} contradicts curvature c={target.c}"
        )

    grid_d = _need(data, "grid", "config")
    _reject_unknown(grid_d, {"dims", "sizes", "lengths", "differentiation"}, "grid")
    try:
        grid = GridSpec(
            dims=int(_need(grid_d, "dims", "grid")),
            sizes=tuple(_need(grid_d, "sizes", "grid")),
            lengths=tuple(_need(grid_d, "lengths", "grid")),
            differentiation=grid_d.get("differentiation", "Spectral"),
        )
    except (PolyflowError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad grid: {exc}") from exc

    map_d = _need(data, "initial_map", "config")
    _reject_unknown(map_d, {"name", "params"}, "initial_map")
    name = _need(map_d, "name", "initial_map")
    params = map_d.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("initial_map.params must be an object")

    try:
        action = Action(_need(data, "action", "config"))
    except ValueError as exc:
        raise ConfigError(f"bad action: {exc}") from exc

    flow_cfg = None
    if action is Action.FLOW:
        flow_d = _need(data, "flow", "config")
        _reject_unknown(
            flow_d,
            {"kind", "dt0", "max_iters", "grad_tol", "armijo_c", "shrink",
             "metric_policy"},
            "flow",
        )
        try:
            flow_cfg = FlowConfig(
                kind=flow_d.get("kind", "Triharmonic"),
                dt0=flow_d.get("dt0"),
                max_iters=int(flow_d.get("max_iters", 10000)),
                grad_tol=float(flow_d.get("grad_tol", 1e-8)),
                armijo_c=float(flow_d.get("armijo_c", 1e-4)),
                shrink=float(flow_d.get("shrink", 0.5)),
                metric_policy=flow_d.get("metric_policy", "FixedPrescribed"),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad flow config: {exc}") from exc
    elif "flow" in data:
        raise ConfigError("flow section is only valid with action = Flow")

    p_list = tuple(float(p) for p in data.get("p_list", (2.0, 4.0)))
    if any(p < 1.0 for p in p_list):
        raise ConfigError("p_list entries must be >= 1")
    seed = int(data.get("seed", 0))
    prefix = str(data.get("output_prefix", "polyflow_out"))
    return ExperimentConfig(
        target=target,
        grid=grid,
        map_name=name,
        map_params=params,
        action=action,
        flow=flow_cfg,
        p_list=p_list,
        output_prefix=prefix,
        seed=seed,
        raw=data,
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(data)


def _thread_cap() -> int:
    raw = os.environ.get("POLYFLOW_THREADS", "0")
    try:
        value = int(raw)
    except ValueError as exc:
        raise ConfigError(f"POLYFLOW_THREADS must be an integer, got {raw!r}") from exc
    if value < 0:
        raise ConfigError("POLYFLOW_THREADS must be >= 0")
    return value


def _choose_metric(phi, action: Action, notes: list):
    """Audits/energies prefer the induced metric so isometric identities
    apply; non-immersed maps fall back to the flat prescribed metric."""
    if action is Action.VARIATION_CHECK:
        notes.append("variation checks run over the fixed flat metric")
        return identity_metric(phi.grid)
    try:
        return induced_metric(phi)
    except DegenerateImmersion:
        notes.append("map does not immerse; using the flat prescribed metric")
        return identity_metric(phi.grid)


def _variation_results(phi, frame, seed: int) -> dict:
    t = 1e-3
    out = {"t": t, "checks": {}}
    ok = True
    for k in (1, 2, 3):
        V = random_tangent_section(phi, seed=seed + k, max_mode=2, amplitude=0.3)
        r1 = first_variation_residual(phi, V, frame, k, t)
        r2 = first_variation_residual(phi, V, frame, k, t / 2.0)
        ratio = r1 / r2 if r2 > 0.0 else float("inf")
        decays = r2 <= ROUNDOFF_FLOOR or 3.5 <= ratio <= 4.5
        passed = r1 <= 1e-4 and decays
        ok = ok and passed
        out["checks"][f"energy_order_{k}"] = {
            "residual": r1,
            "residual_half_t": r2,
            "richardson_ratio": ratio,
            "pass": passed,
        }
    V = random_tangent_section(phi, seed=seed + 7, max_mode=2, amplitude=0.3)
    r1 = tension_variation_residual(phi, V, frame, t)
    r2 = tension_variation_residual(phi, V, frame, t / 2.0)
    ratio = r1 / r2 if r2 > 0.0 else float("inf")
    decays = r2 <= ROUNDOFF_FLOOR or 3.5 <= ratio <= 4.5
    passed = r1 <= 1e-3 and decays
    ok = ok and passed
    out["checks"]["tension_variation"] = {
        "residual": r1,
        "residual_half_t": r2,
        "richardson_ratio": ratio,
        "pass": passed,
    }
    out["pass"] = ok
    return out


def _write_trace(path: Path, trace) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(trace.COLUMNS) + "\n")
        for row in trace.rows():
            fh.write(",".join(repr(v) for v in row) + "\n")


def run(config: ExperimentConfig) -> int:
    """Execute one experiment; writes `<prefix>_summary.json` and, for
    flows, `<prefix>_trace.csv`.  Returns the process exit code."""
    notes = []
    threads = _thread_cap()
    if threads:
        notes.append(f"worker cap {threads} (computation is single-process)")

    grid = build_grid(config.grid)
    phi = builtin_map(config.map_name, config.map_params, grid, config.target)

    summary = {
        "action": config.action.value,
        "config": config.raw,
        "notes": notes,
        "threads": threads,
    }
    exit_code = 0

    if config.action is Action.FLOW:
        metric = None  # identity; ReInduce policy re-derives per step
        phi_final, trace = run_flow(phi, config.flow, metric=metric)
        policy = config.flow.metric_policy
        if policy is MetricPolicy.REINDUCE_EACH_STEP:
            frame = orthonormal_frame(grid, induced_metric(phi_final))
        else:
            frame = orthonormal_frame(grid, identity_metric(grid))
        probe = theorem_probe(phi_final, trace, frame)
        summary["flow"] = {"status": trace.status, "iterations": trace.iters[-1]}
        summary["probe"] = probe.to_dict()
        summary["energies"] = energy_report(
            phi_final, frame, p_list=config.p_list
        ).to_dict()
        trace_path = Path(config.output_prefix + "_trace.csv")
        trace_path.parent.mkdir(parents=True, exist_ok=True)
        _write_trace(trace_path, trace)
    else:
        metric = _choose_metric(phi, config.action, notes)
        frame = orthonormal_frame(grid, metric)
        summary["metric_mode"] = metric.mode.value
        summary["energies"] = energy_report(phi, frame, p_list=config.p_list).to_dict()
        if config.action is Action.AUDIT:
            report = pointwise_identity_audit(phi, frame, seed=config.seed)
            summary["audit"] = report.to_dict()
            if not report.passed:
                failing = [n for n, c in report.checks.items()
                           if not (c.passed or c.skipped)]
                print(f"audit failed: {', '.join(failing)}", file=sys.stderr)
                exit_code = 1
        elif config.action is Action.VARIATION_CHECK:
            variation = _variation_results(phi, frame, config.seed)
            summary["variation"] = variation
            if not variation["pass"]:
                failing = [n for n, c in variation["checks"].items()
                           if not c["pass"]]
                print(f"variation check failed: {', '.join(failing)}",
                      file=sys.stderr)
                exit_code = 1

    out_path = Path(config.output_prefix + "_summary.json")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return exit_code


def _cmd_examples() -> int:
    print(json.dumps(example_catalog(), indent=2, sort_keys=True))
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="polyflow",
        description="tension-field calculus and polyharmonic gradient flow "
        "on constant-curvature targets",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run the experiment in a JSON config")
    p_run.add_argument("config", help="path to the experiment config")
    p_audit = sub.add_parser("audit", help="run the pointwise identity audit")
    p_audit.add_argument("config", help="path to the experiment config")
    sub.add_parser("examples", help="list built-in maps and their parameters")

    args = parser.parse_args(argv)
    if args.command == "examples":
        return _cmd_examples()
    try:
        config = load_config(args.config)
        if args.command == "audit":
            config.action = Action.AUDIT
        return run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except PolyflowError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
