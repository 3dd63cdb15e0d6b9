"""Command-line interface: solve, analytic, verify, and scan subcommands.

Configuration lives in a single JSON file; a few flags override fields for
quick iteration. Standard output carries only artifact paths. Diagnostics go
to standard error, gated by the OBSTACLE_PATH_LOG environment variable
(debug or info). Exit codes: 0 success, 1 configuration or input error,
2 solver non-convergence, 3 verification threshold failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .analytic import solve_sphere, sphere_solution_to_curve
from .curve import DiscreteCurve
from .errors import (ConfigError, InfeasiblePoint, NotConstantSpeed,
                     TautPathError)
from .obstacle import ConvexObstacle, Region, Sphere, obstacle_from_config
from .optimizer import BacktrackingArmijo, FixedStep, SolveConfig, solve
from .structure import StructureReport, StructureTolerances, verify_structure
from .uniqueness import estimate_dimension, scan

log = logging.getLogger("tautpath")

_TOP_FIELDS = {"obstacle", "p", "q", "solver", "region", "delta", "scan",
               "verify", "analytic"}
_SOLVER_FIELDS = {"n_segments", "max_iters", "grad_tol", "n_starts", "seed",
                  "record_every", "step_rule"}
_STEP_FIELDS = {"kind", "c", "shrink", "eta"}
_SCAN_FIELDS = {"cluster_tol", "energy_equal_tol", "jobs"}
_VERIFY_FIELDS = {"contact_tol", "straightness_tol", "tangency_tol",
                  "geodesic_tol", "curvature_slack", "junction_angle_tol"}
_ANALYTIC_FIELDS = {"n_segments"}


def _check_fields(section: dict, allowed: set, prefix: str) -> None:
    for key in section:
        if key not in allowed:
            raise ConfigError(f"unknown field '{prefix}{key}'")


def load_config(path: str) -> dict:
    try:
        with open(path) as handle:
            config = json.load(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON (line {exc.lineno}, "
                          f"column {exc.colno}): {exc.msg}") from exc
    if not isinstance(config, dict):
        raise ConfigError("config root must be a JSON object")
    _check_fields(config, _TOP_FIELDS, "")
    return config


def _point_from(config: dict, key: str, dimension: int) -> np.ndarray:
    if key not in config:
        raise ConfigError(f"missing required field '{key}'")
    value = config[key]
    if (not isinstance(value, list) or len(value) != dimension
            or not all(isinstance(v, (int, float)) for v in value)):
        raise ConfigError(f"field '{key}' must be a list of {dimension} numbers")
    return np.asarray(value, dtype=float)


def _obstacle_from(config: dict) -> ConvexObstacle:
    if "obstacle" not in config:
        raise ConfigError("missing required field 'obstacle'")
    return obstacle_from_config(config["obstacle"])


def _step_rule_from(spec: dict):
    _check_fields(spec, _STEP_FIELDS, "solver.step_rule.")
    kind = spec.get("kind", "armijo")
    if kind == "armijo":
        return BacktrackingArmijo(c=float(spec.get("c", 1e-4)),
                                  shrink=float(spec.get("shrink", 0.5)))
    if kind == "fixed":
        if "eta" not in spec:
            raise ConfigError("solver.step_rule of kind 'fixed' needs 'eta'")
        return FixedStep(eta=float(spec["eta"]))
    raise ConfigError(f"unknown solver.step_rule.kind '{kind}'")


def solve_config_from(config: dict, seed_override: int | None = None) -> SolveConfig:
    section = config.get("solver", {})
    if not isinstance(section, dict):
        raise ConfigError("field 'solver' must be an object")
    _check_fields(section, _SOLVER_FIELDS, "solver.")
    cfg = SolveConfig()
    if "n_segments" in section:
        cfg.n_segments = int(section["n_segments"])
    if "max_iters" in section:
        cfg.max_iters = int(section["max_iters"])
    if "grad_tol" in section:
        cfg.grad_tol = float(section["grad_tol"])
    if "n_starts" in section:
        cfg.n_starts = int(section["n_starts"])
    if "seed" in section:
        cfg.seed = int(section["seed"])
    if "record_every" in section:
        cfg.record_every = int(section["record_every"])
    if "step_rule" in section:
        cfg.step_rule = _step_rule_from(section["step_rule"])
    if seed_override is not None:
        cfg.seed = seed_override
    for name, value in (("n_segments", cfg.n_segments),
                        ("max_iters", cfg.max_iters),
                        ("grad_tol", cfg.grad_tol),
                        ("n_starts", cfg.n_starts)):
        if value <= 0:
            raise ConfigError(f"solver.{name} must be positive")
    return cfg


def tolerances_from(config: dict) -> StructureTolerances:
    section = config.get("verify", {})
    if not isinstance(section, dict):
        raise ConfigError("field 'verify' must be an object")
    _check_fields(section, _VERIFY_FIELDS, "verify.")
    tols = StructureTolerances()
    for name in _VERIFY_FIELDS:
        if name in section:
            value = float(section[name])
            if value <= 0:
                raise ConfigError(f"verify.{name} must be positive")
            setattr(tols, name, value)
    return tols


def _write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as handle:
        json.dump(payload, handle, indent=2)
        handle.write("\n")


def _emit(path: Path) -> None:
    print(str(path))


def cmd_solve(args) -> int:
    config = load_config(args.config)
    obstacle = _obstacle_from(config)
    p = _point_from(config, "p", obstacle.dimension)
    q = _point_from(config, "q", obstacle.dimension)
    cfg = solve_config_from(config, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    results = solve(p, q, obstacle, cfg)
    best = results[0]

    curve_path = out / "curve.csv"
    best.curve.to_csv(curve_path)
    _emit(curve_path)

    results_path = out / "solve_results.json"
    _write_json(results_path, {
        "schema_version": "1",
        "results": [{
            "energy": r.energy,
            "length": r.length,
            "iterations": r.iterations,
            "converged": r.converged,
            "start_index": r.start_index,
            "energy_raw": r.energy_raw,
            "grad_stat": r.grad_stat,
        } for r in results],
    })
    _emit(results_path)

    report_path = out / "structure_report.json"
    try:
        report = verify_structure(best.curve, obstacle, p, q,
                                  tolerances_from(config))
        _write_json(report_path, report.to_json_dict())
    except NotConstantSpeed as exc:
        _write_json(report_path, {"schema_version": "1", "passed": False,
                                  "failures": [str(exc)]})
    _emit(report_path)

    return 0 if best.converged else 2


def cmd_analytic(args) -> int:
    config = load_config(args.config)
    obstacle = _obstacle_from(config)
    if not isinstance(obstacle, Sphere):
        raise ConfigError("the analytic subcommand requires a sphere obstacle")
    p = _point_from(config, "p", obstacle.dimension)
    q = _point_from(config, "q", obstacle.dimension)
    section = config.get("analytic", {})
    if not isinstance(section, dict):
        raise ConfigError("field 'analytic' must be an object")
    _check_fields(section, _ANALYTIC_FIELDS, "analytic.")
    n_segments = int(section.get("n_segments", 512))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    solution = solve_sphere(obstacle.center, obstacle.radius, p, q)
    solution_path = out / "analytic_solution.json"
    _write_json(solution_path, solution.to_json_dict())
    _emit(solution_path)

    curve_path = out / "analytic_curve.csv"
    sphere_solution_to_curve(solution, n_segments).to_csv(curve_path)
    _emit(curve_path)
    return 0


def cmd_verify(args) -> int:
    config = load_config(args.config)
    obstacle = _obstacle_from(config)
    try:
        curve = DiscreteCurve.from_csv(args.curve)
    except OSError as exc:
        print(f"cannot read curve file: {exc}", file=sys.stderr)
        return 1
    if curve.dimension != obstacle.dimension:
        raise ConfigError(
            f"curve dimension {curve.dimension} does not match obstacle "
            f"dimension {obstacle.dimension}")
    for label, endpoint in (("first", curve.p), ("last", curve.q)):
        if obstacle.contains(endpoint) is not Region.EXTERIOR:
            raise ConfigError(f"curve's {label} node is not exterior")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    report_path = out / "structure_report.json"

    try:
        report = verify_structure(curve, obstacle, curve.p, curve.q,
                                  tolerances_from(config))
    except NotConstantSpeed as exc:
        _write_json(report_path, {"schema_version": "1", "passed": False,
                                  "failures": [str(exc)]})
        _emit(report_path)
        return 3

    _write_json(report_path, report.to_json_dict())
    _emit(report_path)
    return 0 if report.passed else 3


def cmd_scan(args) -> int:
    config = load_config(args.config)
    obstacle = _obstacle_from(config)
    p = _point_from(config, "p", obstacle.dimension)
    if "region" not in config:
        raise ConfigError("missing required field 'region'")
    region = config["region"]
    if (not isinstance(region, list) or len(region) != obstacle.dimension
            or not all(isinstance(r, list) and len(r) == 2 for r in region)):
        raise ConfigError("field 'region' must be a list of [low, high] pairs, "
                          "one per dimension")
    if "delta" not in config:
        raise ConfigError("missing required field 'delta'")
    delta = float(config["delta"])
    if delta <= 0:
        raise ConfigError("field 'delta' must be positive")

    section = config.get("scan", {})
    if not isinstance(section, dict):
        raise ConfigError("field 'scan' must be an object")
    _check_fields(section, _SCAN_FIELDS, "scan.")
    cluster_tol = section.get("cluster_tol")
    energy_equal_tol = float(section.get("energy_equal_tol", 1e-5))
    jobs = args.jobs if args.jobs is not None else int(section.get("jobs", 1))
    cfg = solve_config_from(config, args.seed)

    try:
        scan_map = scan(p, obstacle, region, delta, cfg,
                        cluster_tol=cluster_tol,
                        energy_equal_tol=energy_equal_tol, jobs=jobs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    try:
        scan_map.metadata["dimension_estimate"] = estimate_dimension(scan_map)
    except TautPathError as exc:
        scan_map.metadata["dimension_estimate"] = None
        scan_map.metadata["dimension_note"] = str(exc)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.format in (None, "csv"):
        csv_path = out / "scan.csv"
        scan_map.to_csv(csv_path)
        _emit(csv_path)
    if args.format in (None, "json"):
        json_path = out / "scan.json"
        _write_json(json_path, scan_map.to_json_dict())
        _emit(json_path)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tautpath",
        description="Shortest and least-energy paths around a convex obstacle.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", required=True, help="path to JSON config")
        sp.add_argument("--out", default=".", help="output directory")
        sp.add_argument("--format", choices=["json", "csv"], default=None,
                        help="restrict dual-format artifacts to one format")
        sp.add_argument("--seed", type=int, default=None,
                        help="override solver seed")
        sp.add_argument("--jobs", type=int, default=None,
                        help="worker process cap for scan")

    sp_solve = sub.add_parser("solve", help="multi-start energy minimization")
    common(sp_solve)
    sp_solve.set_defaults(handler=cmd_solve)

    sp_analytic = sub.add_parser("analytic", help="closed-form sphere solution")
    common(sp_analytic)
    sp_analytic.set_defaults(handler=cmd_analytic)

    sp_verify = sub.add_parser("verify", help="structural checks on a curve file")
    sp_verify.add_argument("curve", help="curve CSV file")
    common(sp_verify)
    sp_verify.set_defaults(handler=cmd_verify)

    sp_scan = sub.add_parser("scan", help="map minimizer multiplicity over a grid")
    common(sp_scan)
    sp_scan.set_defaults(handler=cmd_scan)

    return parser


def _setup_logging() -> None:
    level_name = os.environ.get("OBSTACLE_PATH_LOG", "").lower()
    level = {"debug": logging.DEBUG, "info": logging.INFO}.get(level_name,
                                                               logging.WARNING)
    logging.basicConfig(stream=sys.stderr, level=level,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except InfeasiblePoint as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except TautPathError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
