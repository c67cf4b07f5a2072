"""Monte Carlo noise studies of the heading-only solver."""

from __future__ import annotations

import csv
import dataclasses
import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .hodograph import MOON, CentralBody, OrbitalElements
from .simulate import Scenario, generate_observations, random_orbit, spread_anomalies
from .solver import SolverOptions, solve

SUMMARY_FIELDS = (
    "n_observations", "noise_deg", "a_err_sigma_km", "e_err_sigma",
    "trials", "converged", "failures",
    "a_err_mean_km", "a_err_std_km", "e_err_mean", "e_err_std",
)
TRIAL_FIELDS = ("n_observations", "noise_deg", "trial", "a_err_km", "e_err",
                "abs_a_err_km", "abs_e_err", "converged")


@dataclass(frozen=True)
class McConfig:
    scenario: Scenario
    trials: int
    noise_levels: tuple[float, ...]
    master_seed: int = 0
    solver: SolverOptions = SolverOptions()

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if any(not s >= 0 for s in self.noise_levels):
            raise ValueError("noise levels must be non-negative")
        object.__setattr__(self, "noise_levels", tuple(float(s) for s in self.noise_levels))


@dataclass
class LevelResult:
    n_observations: int
    noise_deg: float
    a_errors: np.ndarray  # km, NaN where the solve failed
    e_errors: np.ndarray
    converged: np.ndarray

    @property
    def trials(self) -> int:
        return len(self.converged)

    @property
    def failure_count(self) -> int:
        return int(np.count_nonzero(~self.converged))

    def _ok(self, err):
        return err[self.converged]

    @property
    def a_error_sigma(self) -> float:
        """RMS of signed semi-major axis errors over converged trials (NaN if none)."""
        return _rms(self._ok(self.a_errors))

    @property
    def e_error_sigma(self) -> float:
        return _rms(self._ok(self.e_errors))


@dataclass
class McResult:
    levels: list[LevelResult]


def _rms(x: np.ndarray) -> float:
    return float(np.sqrt(np.mean(x * x))) if x.size else math.nan


def _std(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1)) if x.size > 1 else math.nan


def trial_seed(master_seed: int, level_index: int, trial: int) -> int:
    """Scenario seed for one trial, independent of execution order."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(level_index, trial))
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def run_trial(cfg: McConfig, level_index: int, trial: int) -> tuple[float, float, bool]:
    """Signed (a, e) errors of one noisy solve; NaNs and False if it failed."""
    truth = cfg.scenario.elements
    sc = dataclasses.replace(cfg.scenario, noise_sigma_deg=cfg.noise_levels[level_index],
                             seed=trial_seed(cfg.master_seed, level_index, trial))
    try:
        rep = solve(generate_observations(sc), sc.body, cfg.solver)
    except ValueError:  # includes degenerate geometry and non-elliptical input
        return math.nan, math.nan, False
    if not rep.converged:
        return math.nan, math.nan, False
    return rep.elements.a - truth.a, rep.elements.e - truth.e, True


def _run_chunk(args):
    cfg, level_index, trials = args
    return [run_trial(cfg, level_index, t) for t in trials]


def run_monte_carlo(cfg: McConfig, workers: int = 1, chunk_size: int = 250) -> McResult:
    """Run every trial at every noise level.

    Each trial draws from its own seed stream, and chunks are reassembled in
    trial order, so the result does not depend on ``workers``.
    """
    jobs = []
    for li in range(len(cfg.noise_levels)):
        for start in range(0, cfg.trials, chunk_size):
            jobs.append((cfg, li, range(start, min(start + chunk_size, cfg.trials))))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_chunk, jobs))
    else:
        chunks = [_run_chunk(job) for job in jobs]

    per_level: dict[int, list] = {li: [] for li in range(len(cfg.noise_levels))}
    for (_, li, _), chunk in zip(jobs, chunks):
        per_level[li].extend(chunk)
    levels = []
    for li, rows in per_level.items():
        a, e, ok = (np.array(col) for col in zip(*rows))
        levels.append(LevelResult(cfg.scenario.n_observations, cfg.noise_levels[li],
                                  a.astype(float), e.astype(float), ok.astype(bool)))
    return McResult(levels)


def summarize(result: McResult) -> list[dict]:
    """One row per noise level: error columns first, then bookkeeping.

    Sigmas are the RMS of signed errors over converged trials; with a single
    converged trial the RMS is that trial's absolute error and the sample
    standard deviation is NaN.  A level with no converged trial reports NaN.
    """
    rows = []
    for lv in result.levels:
        a, e = lv._ok(lv.a_errors), lv._ok(lv.e_errors)
        rows.append({
            "n_observations": lv.n_observations,
            "noise_deg": lv.noise_deg,
            "a_err_sigma_km": lv.a_error_sigma,
            "e_err_sigma": lv.e_error_sigma,
            "trials": lv.trials,
            "converged": lv.trials - lv.failure_count,
            "failures": lv.failure_count,
            "a_err_mean_km": float(np.mean(a)) if a.size else math.nan,
            "a_err_std_km": _std(a),
            "e_err_mean": float(np.mean(e)) if e.size else math.nan,
            "e_err_std": _std(e),
        })
    return rows


def trial_rows(result: McResult) -> Iterable[dict]:
    for lv in result.levels:
        for t in range(lv.trials):
            a, e = float(lv.a_errors[t]), float(lv.e_errors[t])
            yield {"n_observations": lv.n_observations, "noise_deg": lv.noise_deg, "trial": t,
                   "a_err_km": a, "e_err": e, "abs_a_err_km": abs(a), "abs_e_err": abs(e),
                   "converged": int(lv.converged[t])}


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def rows_to_csv(rows: Iterable[dict], fields: tuple[str, ...]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(fields)
    for row in rows:
        w.writerow([_fmt(row[f]) for f in fields])
    return buf.getvalue()


def read_summary_csv(text: str) -> list[dict]:
    ints = {"n_observations", "trials", "converged", "failures"}
    return [{k: (int(v) if k in ints else float(v)) for k, v in row.items()}
            for row in csv.DictReader(io.StringIO(text))]



@dataclass(frozen=True)
class SweepCase:
    elements: OrbitalElements
    anomalies_deg: tuple[float, ...]
    a_rel_err: float
    e_rel_err: float
    converged: bool


def recovery_sweep(rng: np.random.Generator, orbits: int, n_observations: int,
                   body: CentralBody = MOON, solver: SolverOptions = SolverOptions()) -> list[SweepCase]:
    """Noise-free solves of random orbits sampled over a random 230-330 deg arc.

    Relative errors are ``|a - a_true| / a_true`` and ``|e - e_true| / e_true``;
    a failed solve reports ``inf`` for both.
    """
    cases = []
    for _ in range(orbits):
        el = random_orbit(rng)
        anomalies = spread_anomalies(rng, n_observations)
        try:
            rep = solve(generate_observations(Scenario(el, body, anomalies)), body, solver)
        except ValueError:
            cases.append(SweepCase(el, anomalies, math.inf, math.inf, False))
            continue
        a_err = abs(rep.elements.a - el.a) / el.a
        e_err = abs(rep.elements.e - el.e) / el.e if el.e > 0 else abs(rep.elements.e)
        cases.append(SweepCase(el, anomalies, a_err, e_err, rep.converged))
    return cases
