"""Command-line front end: ``simulate``, ``solve`` and ``montecarlo``.

Configs are JSON documents carrying ``schema_version``; angles in configs are
degrees.  Exit codes: 0 success, 2 bad input or config, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from .hodograph import CentralBody, HeadingObservation, NonEllipticalError, OrbitalElements
from .montecarlo import (
    SUMMARY_FIELDS,
    TRIAL_FIELDS,
    McConfig,
    rows_to_csv,
    run_monte_carlo,
    summarize,
    trial_rows,
)
from .plane import DegenerateGeometryError
from .simulate import Scenario, generate_observations
from .solver import MIN_OBSERVATIONS, SolverOptions, solve

SCHEMA_VERSION = 1
OBS_HEADER = ("t_sec", "sx", "sy", "sz")
HEADING_NORM_TOL = 1e-6

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("hodoiod")


class ConfigError(Exception):
    pass


# -- config parsing -----------------------------------------------------------

def _fields(doc, where: str, required: set[str], optional: set[str] = frozenset()) -> dict:
    if not isinstance(doc, dict):
        raise ConfigError(f"{where}: expected an object")
    unknown = sorted(set(doc) - required - optional)
    if unknown:
        raise ConfigError(f"{where}: unknown field(s) {', '.join(unknown)}")
    missing = sorted(required - set(doc))
    if missing:
        raise ConfigError(f"{where}: missing field(s) {', '.join(missing)}")
    return doc


def _number(doc: dict, key: str, where: str) -> float:
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ConfigError(f"{where}.{key}: expected a finite number, got {v!r}")
    return float(v)


def _integer(doc: dict, key: str, where: str) -> int:
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{where}.{key}: expected an integer, got {v!r}")
    return v


def _numbers(doc: dict, key: str, where: str) -> tuple[float, ...]:
    v = doc[key]
    if not isinstance(v, list) or not v:
        raise ConfigError(f"{where}.{key}: expected a non-empty list of numbers")
    return tuple(_number({key: x}, key, where) for x in v)


def _check_version(doc: dict):
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: expected {SCHEMA_VERSION}, got {doc.get('schema_version')!r}")


def _body(doc: dict) -> CentralBody:
    try:
        return CentralBody(_number(doc, "mu_km3_s2", "config"))
    except ValueError as exc:
        raise ConfigError(f"config.mu_km3_s2: {exc}") from None


def _elements(doc) -> OrbitalElements:
    where = "config.elements"
    el = _fields(doc, where, {"a_km", "e", "inc_deg", "raan_deg", "argp_deg"})
    try:
        return OrbitalElements.from_degrees(*(_number(el, k, where)
                                              for k in ("a_km", "e", "inc_deg", "raan_deg", "argp_deg")))
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def _sampling(doc: dict, where: str) -> dict:
    has_theta, has_t = "true_anomalies_deg" in doc, "times_s" in doc
    if has_theta == has_t:
        raise ConfigError(f"{where}: give exactly one of true_anomalies_deg or times_s")
    key = "true_anomalies_deg" if has_theta else "times_s"
    return {key: _numbers(doc, key, where)}


def _scenario(body, elements, sampling, noise, seed, where) -> Scenario:
    try:
        return Scenario(elements, body, noise_sigma_deg=noise, seed=seed, **sampling)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def load_simulate_config(doc: dict) -> Scenario:
    _fields(doc, "config", {"schema_version", "mu_km3_s2", "elements"},
            {"true_anomalies_deg", "times_s", "noise_sigma_deg", "seed"})
    _check_version(doc)
    noise = _number(doc, "noise_sigma_deg", "config") if "noise_sigma_deg" in doc else 0.0
    seed = _integer(doc, "seed", "config") if "seed" in doc else 0
    return _scenario(_body(doc), _elements(doc["elements"]), _sampling(doc, "config"),
                     noise, seed, "config")


def load_montecarlo_config(doc: dict) -> tuple[list[tuple[str, McConfig]], int]:
    """List of ``(study name, McConfig)`` plus the requested worker count."""
    _fields(doc, "config", {"schema_version", "mu_km3_s2", "elements", "trials",
                            "noise_levels_deg", "studies"},
            {"master_seed", "workers", "e_min", "max_iterations"})
    _check_version(doc)
    body, elements = _body(doc), _elements(doc["elements"])
    trials = _integer(doc, "trials", "config")
    if trials < 1:
        raise ConfigError("config.trials: must be at least 1")
    levels = _numbers(doc, "noise_levels_deg", "config")
    if any(s < 0 for s in levels):
        raise ConfigError("config.noise_levels_deg: must be non-negative")
    seed = _integer(doc, "master_seed", "config") if "master_seed" in doc else 0
    workers = _integer(doc, "workers", "config") if "workers" in doc else 1
    opts = SolverOptions(
        e_min=_number(doc, "e_min", "config") if "e_min" in doc else SolverOptions.e_min,
        max_iterations=(_integer(doc, "max_iterations", "config") if "max_iterations" in doc
                         else SolverOptions.max_iterations))
    studies = doc["studies"]
    if not isinstance(studies, list) or not studies:
        raise ConfigError("config.studies: expected a non-empty list")
    out = []
    for k, st in enumerate(studies):
        where = f"config.studies[{k}]"
        _fields(st, where, {"name"}, {"true_anomalies_deg", "times_s"})
        sc = _scenario(body, elements, _sampling(st, where), 0.0, 0, where)
        out.append((str(st["name"]), McConfig(sc, trials, levels, seed, opts)))
    return out, workers


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None


# -- observation files --------------------------------------------------------

def observations_to_csv(observations) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(OBS_HEADER)
    for ob in observations:
        w.writerow([repr(float(ob.t))] + [repr(float(v)) for v in ob.s])
    return buf.getvalue()


def read_observations(path: str) -> list[HeadingObservation]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(h.strip() for h in rows[0]) != OBS_HEADER:
        raise ConfigError(f"{path}: header must be {','.join(OBS_HEADER)}")
    obs = []
    for line, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        try:
            t, *s = (float(v) for v in row)
        except ValueError:
            raise ConfigError(f"{path}:{line}: non-numeric value") from None
        if len(s) != 3 or not all(math.isfinite(v) for v in (t, *s)):
            raise ConfigError(f"{path}:{line}: expected 4 finite values")
        if abs(np.linalg.norm(s) - 1.0) > HEADING_NORM_TOL:
            raise ConfigError(f"{path}:{line}: heading is not unit-norm")
        obs.append(HeadingObservation(np.array(s), t))
    return obs


# -- commands -----------------------------------------------------------------

def _write(path: str, text: str):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def cmd_simulate(args) -> int:
    sc = load_simulate_config(_read_json(args.config))
    _write(args.output, observations_to_csv(generate_observations(sc)))
    return EXIT_OK


def solution_document(rep) -> dict:
    el = rep.elements
    return {
        "schema_version": SCHEMA_VERSION,
        "converged": bool(rep.converged),
        "iterations": rep.iterations,
        "objective_s2": rep.objective,
        "R_km_s": float(rep.x_star[0]),
        "c_prime_km_s": [float(rep.x_star[1]), float(rep.x_star[2])],
        "c_km_s": rep.hodograph.c.tolist(),
        "w_hat": rep.hodograph.w_hat.tolist(),
        "plane_residual": rep.plane_residual,
        "elements": {
            "a_km": el.a,
            "e": el.e,
            "inc_deg": math.degrees(el.inc),
            "raan_deg": math.degrees(el.raan),
            "argp_deg": math.degrees(el.argp),
            "periapsis_defined": bool(el.periapsis_defined),
            "node_defined": bool(el.node_defined),
        },
        "residual_history_s2": list(rep.residual_history),
    }


def cmd_solve(args) -> int:
    obs = read_observations(args.observations)
    if len(obs) < MIN_OBSERVATIONS:
        raise ConfigError(f"need at least {MIN_OBSERVATIONS} observations, got {len(obs)}")
    if len({ob.t for ob in obs}) != len(obs):
        raise ConfigError("duplicate observation timestamps")
    try:
        body = CentralBody(args.mu)
    except ValueError as exc:
        raise ConfigError(f"--mu: {exc}") from None
    opts = SolverOptions(e_min=args.e_min, max_iterations=args.max_iter)
    try:
        rep = solve(obs, body, opts)
    except (DegenerateGeometryError, NonEllipticalError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if args.echo_iterations:
        print(f"{'m':>3} {'residual_s2':>14} {'R':>10} {'c1':>10} {'c2':>10}")
        for rec in rep.history:
            print(f"{rec.m:>3d} {rec.objective:>14.6g} {rec.x[0]:>10.4f} {rec.x[1]:>10.4f} {rec.x[2]:>10.4f}")
    _write(args.output, json.dumps(solution_document(rep), indent=2) + "\n")
    if not rep.converged:
        print("error: solver did not converge; best estimate written", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    studies, workers = load_montecarlo_config(_read_json(args.config))
    if args.workers is not None:
        workers = args.workers
    summary, trials = [], []
    for name, cfg in studies:
        log.info("running study %s: %d trials x %d noise levels", name, cfg.trials,
                 len(cfg.noise_levels))
        result = run_monte_carlo(cfg, workers=workers)
        summary.extend(summarize(result))
        trials.extend(trial_rows(result))
    _write(args.output, rows_to_csv(summary, SUMMARY_FIELDS))
    trials_path = args.trials_output or str(Path(args.output).with_suffix("")) + "_trials.csv"
    _write(trials_path, rows_to_csv(trials, TRIAL_FIELDS))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hodoiod", description="Orbit determination from heading observations.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="generate heading observations from a truth orbit")
    s.add_argument("config")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("solve", help="determine the orbit from an observation CSV")
    s.add_argument("observations")
    s.add_argument("--mu", type=float, required=True, help="gravitational parameter, km^3/s^2")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--echo-iterations", action="store_true")
    s.add_argument("--e-min", type=float, default=SolverOptions.e_min)
    s.add_argument("--max-iter", type=int, default=SolverOptions.max_iterations)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("montecarlo", help="run a noise study and write summary CSVs")
    s.add_argument("config")
    s.add_argument("-o", "--output", required=True, help="summary CSV path")
    s.add_argument("--trials-output", help="per-trial CSV path (default: <output>_trials.csv)")
    s.add_argument("--workers", type=int)
    s.set_defaults(func=cmd_montecarlo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
