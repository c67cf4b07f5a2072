"""Heading-only initial orbit determination.

The orbit plane is fitted first; within it the unknowns are the hodograph
radius and the two in-plane center coordinates, ``x = [R, c1, c2]``.  For
every pair of observations the time of flight predicted from ``x`` and the
two headings is compared to the measured one, and the stacked residuals are
minimised with Levenberg-Marquardt starting from a circular-orbit guess.

All in-plane quantities are expressed in the intermediate frame built by
:func:`hodoiod.plane.build_frame`, where the orbit normal is ``[0, 0, 1]``.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .hodograph import (
    TWO_PI,
    CentralBody,
    HeadingObservation,
    HodographParams,
    NonEllipticalError,
    OrbitalElements,
    hodograph_to_elements,
)
from .plane import PlaneFrame, build_frame, estimate_normal, from_plane, time_ordered, to_plane

log = logging.getLogger(__name__)

MIN_OBSERVATIONS = 4

# Threshold on |c'|/R below which [1, 0, 0] replaces c' as the reference
# direction.  Pair times of flight are smooth through c' = 0, so the switch is
# only needed to dodge atan2(0, 0).  It must stay below fd_rel_step: with the
# often-quoted 1e-3 the difference steps at the circular guess stay inside the
# switched region, see only |c'|, and the iteration stalls on a circle.
REGULARIZATION_E_MIN = 1e-10


@dataclass(frozen=True)
class SolverOptions:
    e_min: float = REGULARIZATION_E_MIN
    max_iterations: int = 100
    step_tol: float = 1e-12  # on ||dx||_inf / (1 + ||x||)
    objective_tol: float = 1e-20  # s^2
    fd_rel_step: float = 1e-7
    fd_scheme: str = "central"  # or "forward"
    initial_damping: float = 1e-3  # times mean(diag(J^T J))
    damping_factor: float = 10.0
    max_damping: float = 1e30


@dataclass(frozen=True)
class IterationRecord:
    m: int
    objective: float  # sum of squared time-of-flight residuals, s^2
    x: np.ndarray


@dataclass
class SolveReport:
    x_star: np.ndarray
    hodograph: HodographParams
    elements: OrbitalElements
    iterations: int
    residual_history: list[float]
    converged: bool
    plane_residual: float
    frame: PlaneFrame
    history: list[IterationRecord] = field(default_factory=list, repr=False)

    @property
    def objective(self) -> float:
        return self.residual_history[-1]


def _as_batch(x) -> np.ndarray:
    return np.atleast_2d(np.asarray(x, dtype=float))


def _in_plane(s_prime) -> np.ndarray:
    """First two in-plane components of one heading or a stack of them."""
    return np.atleast_2d(np.asarray(s_prime, dtype=float))[:, :2]


def _mean_anomalies(X: np.ndarray, Sp: np.ndarray, e_min: float) -> np.ndarray:
    """Mean anomaly of every heading (columns) for every parameter row of ``X``.

    The eccentric anomaly is referenced to ``c'`` unless the orbit is
    effectively circular, in which case ``[1, 0]`` stands in for it.
    """
    R = X[:, :1]
    c = X[:, 1:3]
    cn = np.linalg.norm(c, axis=1, keepdims=True)
    ecc = cn / R
    d = np.where(ecc > e_min, c, np.array([1.0, 0.0]))
    cross = d[:, :1] * Sp[:, 1] - d[:, 1:] * Sp[:, 0]
    dot = d[:, :1] * Sp[:, 0] + d[:, 1:] * Sp[:, 1]
    E = np.arctan2(np.sqrt(R**2 - cn**2) * cross, R * dot)
    return E - ecc * np.sin(E)


def _feasible(X: np.ndarray) -> np.ndarray:
    return (X[:, 0] > 0) & (X[:, 0] ** 2 - X[:, 1] ** 2 - X[:, 2] ** 2 > 0)


def _pair_times(X, Sp, i, j, mu, e_min) -> np.ndarray:
    """Predicted times of flight for pairs ``(i, j)``, one revolution added where needed."""
    M = _mean_anomalies(X, Sp, e_min)
    n = (X[:, :1] ** 2 - X[:, 1:2] ** 2 - X[:, 2:3] ** 2) ** 1.5 / mu
    dM = M[:, j] - M[:, i]
    return np.where(dM < 0, dM + TWO_PI, dM) / n


def regularized_center(x, e_min: float = REGULARIZATION_E_MIN) -> np.ndarray:
    """Reference direction used for eccentric anomaly: ``c'`` or ``[1, 0, 0]``."""
    R, c1, c2 = (float(v) for v in x)
    if math.hypot(c1, c2) / R > e_min:
        return np.array([c1, c2, 0.0])
    return np.array([1.0, 0.0, 0.0])


def _check_elliptical(x):
    X = _as_batch(x)
    if not _feasible(X).all():
        raise NonEllipticalError(f"parameters {X.tolist()} do not describe an ellipse")
    return X


def mean_anomaly_g(x, s_prime, e_min: float = REGULARIZATION_E_MIN) -> float:
    """Mean anomaly implied by parameters ``x`` and in-plane heading ``s_prime``."""
    X = _check_elliptical(x)
    return float(_mean_anomalies(X, _in_plane(s_prime), e_min)[0, 0])


def select_k(x, s_i, s_j, body: CentralBody, e_min: float = REGULARIZATION_E_MIN) -> int:
    """Periapsis passages between two headings less than one period apart."""
    X = _check_elliptical(x)
    M = _mean_anomalies(X, np.vstack([_in_plane(s_i), _in_plane(s_j)]), e_min)[0]
    return 1 if M[1] - M[0] < 0 else 0


def time_of_flight_f(x, s_i, s_j, body: CentralBody, k: int | None = None,
                     e_min: float = REGULARIZATION_E_MIN) -> float:
    """Time of flight (s) from heading ``s_i`` to ``s_j``; ``k`` is chosen if omitted."""
    X = _check_elliptical(x)
    if k is None:
        k = select_k(X[0], s_i, s_j, body, e_min)
    M = _mean_anomalies(X, np.vstack([_in_plane(s_i), _in_plane(s_j)]), e_min)[0]
    R, c1, c2 = X[0]
    return body.mu / (R * R - c1 * c1 - c2 * c2) ** 1.5 * (TWO_PI * k + M[1] - M[0])


def initial_guess(s_prime, times, body: CentralBody) -> np.ndarray:
    """Circular-orbit starting point ``[R0, 0, 0]``.

    For a circular orbit heading angle advances uniformly, so every pair gives
    ``R0 = (mu * dbeta / dt)^(1/3)``; the estimates of all pairs are averaged.
    """
    Sp = _in_plane(s_prime)
    times = np.asarray(times, dtype=float)
    if len(times) < 2:
        raise ValueError("at least two observations are required")
    i, j = (np.array(v, dtype=int) for v in zip(*itertools.combinations(range(len(times)), 2)))
    dt = times[j] - times[i]
    if np.any(dt <= 0):
        raise ValueError("observation times must be strictly increasing")
    cross = Sp[i, 0] * Sp[j, 1] - Sp[i, 1] * Sp[j, 0]
    dot = np.einsum("ij,ij->i", Sp[i], Sp[j])
    dbeta = np.mod(np.arctan2(cross, dot), TWO_PI)
    if np.all(dbeta == 0):
        raise ValueError("headings do not change between observations")
    return np.array([np.mean(np.cbrt(body.mu * dbeta / dt)), 0.0, 0.0])


class PairProblem:
    """Stacked time-of-flight residuals over all observation pairs."""

    def __init__(self, s_prime, times, body: CentralBody, e_min: float = REGULARIZATION_E_MIN):
        self.Sp = _in_plane(s_prime)
        self.times = np.asarray(times, dtype=float)
        pairs = list(itertools.combinations(range(len(self.times)), 2))
        self.i = np.array([p[0] for p in pairs], dtype=int)
        self.j = np.array([p[1] for p in pairs], dtype=int)
        self.dt = self.times[self.j] - self.times[self.i]
        self.mu = body.mu
        self.e_min = e_min

    def residuals(self, X) -> np.ndarray:
        """Measured minus predicted time of flight; rows follow ``X``."""
        X = _as_batch(X)
        return self.dt - _pair_times(X, self.Sp, self.i, self.j, self.mu, self.e_min)

    def objective(self, x) -> float:
        r = self.residuals(x)[0]
        return float(r @ r)

    def jacobian(self, x, rel_step: float = 1e-7, scheme: str = "central") -> np.ndarray:
        """Finite-difference Jacobian of the predicted times of flight.

        Steps are ``max(rel_step, rel_step * |x_c|)`` per component.
        """
        x = np.asarray(x, dtype=float)
        h = np.maximum(rel_step, rel_step * np.abs(x))
        steps = np.diag(h)
        if scheme == "central":
            f = -self.residuals(np.vstack([x + steps, x - steps]))  # dt cancels
            return ((f[:3] - f[3:]) / (2.0 * h[:, None])).T
        if scheme != "forward":
            raise ValueError(f"unknown finite-difference scheme {scheme!r}")
        f = -self.residuals(np.vstack([x, x + steps]))
        return ((f[1:] - f[0]) / h[:, None]).T


def levenberg_marquardt(problem: PairProblem, x0, opts: SolverOptions):
    """Minimise the pair objective from ``x0``.

    Trial steps that leave the elliptical domain or fail to lower the objective
    are rejected and the damping is raised.  Returns ``(x, history, converged)``.
    """
    x = np.asarray(x0, dtype=float)
    F = problem.objective(x)
    history = [IterationRecord(0, F, x.copy())]
    if F < opts.objective_tol:
        return x, history, True
    lam = None
    for m in range(1, opts.max_iterations + 1):
        J = problem.jacobian(x, opts.fd_rel_step, opts.fd_scheme)
        r = problem.residuals(x)[0]
        A = J.T @ J
        g = J.T @ r
        if lam is None:
            lam = opts.initial_damping * float(np.mean(np.diag(A)))
        while True:
            try:
                dx = np.linalg.solve(A + lam * np.eye(3), g)
            except np.linalg.LinAlgError:
                dx = np.full(3, np.nan)
            if not np.all(np.isfinite(dx)):
                lam *= opts.damping_factor
                if lam > opts.max_damping:
                    return x, history, False
                continue
            small = np.max(np.abs(dx)) < opts.step_tol * (1.0 + np.linalg.norm(x))
            trial = x + dx
            if _feasible(trial[None])[0]:
                F_trial = problem.objective(trial)
                if F_trial < F:
                    break
            if small:
                return x, history, True
            lam *= opts.damping_factor
            if lam > opts.max_damping:
                log.debug("damping exhausted at iteration %d", m)
                return x, history, False
        x, F = trial, F_trial
        lam /= opts.damping_factor
        history.append(IterationRecord(m, F, x.copy()))
        if F < opts.objective_tol or small:
            return x, history, True
    return x, history, False


def solve(observations: Sequence[HeadingObservation], body: CentralBody,
          options: SolverOptions | None = None) -> SolveReport:
    """Determine the orbit from four or more timed heading observations.

    Observations may be given in any order; they are sorted by time and must
    span less than one orbital period.
    """
    opts = options or SolverOptions()
    if len(observations) < MIN_OBSERVATIONS:
        raise ValueError(f"need at least {MIN_OBSERVATIONS} observations, got {len(observations)}")
    obs = time_ordered(observations)
    times = np.array([ob.t for ob in obs])
    if np.any(np.diff(times) <= 0):
        raise ValueError("observation times must be distinct")

    fit = estimate_normal(obs)
    frame = build_frame(fit.w_hat, obs[0].s)
    Sp = to_plane(frame, np.array([ob.s for ob in obs]))[:, :2]

    problem = PairProblem(Sp, times - times[0], body, opts.e_min)
    x0 = initial_guess(Sp, times, body)
    x, history, converged = levenberg_marquardt(problem, x0, opts)

    hodograph = HodographParams(R=float(x[0]), c=from_plane(frame, x[1:]), w_hat=frame.w_hat)
    return SolveReport(
        x_star=x,
        hodograph=hodograph,
        elements=hodograph_to_elements(hodograph, body),
        iterations=len(history) - 1,
        residual_history=[rec.objective for rec in history],
        converged=converged,
        plane_residual=fit.residual,
        frame=frame,
        history=history,
    )
