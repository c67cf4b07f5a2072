"""Kepler's equation, mean motion and a two-body heading propagator.

Kepler's equation is used in its standard elliptical form ``M = E - e sin E``.
Some printings of the hodograph relations show ``E + e sin E``; that sign does
not reproduce the tabulated reference times (E = 4.30 deg, e = 0.15 gives
t - t0 = 1.54 min only with the minus sign), so do not flip it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hodograph import (
    TWO_PI,
    CentralBody,
    HodographParams,
    NonEllipticalError,
    OrbitalElements,
    elements_to_hodograph,
    perifocal_basis,
    velocity_at_true_anomaly,
)


class KeplerConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class AnomalySet:
    theta: float
    E: float
    M: float

    @classmethod
    def from_true(cls, theta: float, e: float) -> AnomalySet:
        E = eccentric_from_true(theta, e)
        return cls(theta, E, float(mean_from_eccentric(E, e)))

    @classmethod
    def from_mean(cls, M: float, e: float) -> AnomalySet:
        E = eccentric_from_mean(M, e)
        return cls(float(true_from_eccentric(E, e)), E, M)


def mean_motion(hp: HodographParams, body: CentralBody) -> float:
    """Mean motion (rad/s) directly from the hodograph: (R^2 - c.c)^1.5 / mu."""
    d = hp.R**2 - float(hp.c @ hp.c)
    if d <= 0:
        raise NonEllipticalError("R^2 - c.c must be positive")
    return d**1.5 / body.mu


def mean_from_eccentric(E, e):
    return E - e * np.sin(E)


def eccentric_from_mean(M: float, e: float, tol: float = 1e-13, max_iter: int = 50) -> float:
    """Invert Kepler's equation by Newton's method from ``E0 = M``.

    The revolution count of ``M`` is preserved.  Falls back to bisection on
    ``[M - e, M + e]`` if Newton fails to settle.
    """
    if not 0.0 <= e < 1.0:
        raise NonEllipticalError(f"eccentricity must lie in [0, 1), got {e}")
    M = float(M)
    revs = math.floor((M + math.pi) / TWO_PI)
    Mr = M - revs * TWO_PI  # in [-pi, pi)
    E = Mr
    for _ in range(max_iter):
        dE = (E - e * math.sin(E) - Mr) / (1.0 - e * math.cos(E))
        E -= dE
        if abs(dE) < tol:
            return E + revs * TWO_PI
    E = _bisect_kepler(Mr, e, tol)
    return E + revs * TWO_PI


def _bisect_kepler(M: float, e: float, tol: float) -> float:
    lo, hi = M - e, M + e
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - e * math.sin(mid) < M:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol:
            return 0.5 * (lo + hi)
    raise KeplerConvergenceError(f"Kepler's equation did not converge for M={M}, e={e}")


def true_from_eccentric(E, e):
    """True anomaly, same quadrant (and revolution) as ``E``."""
    theta = np.arctan2(np.sqrt(1.0 - e * e) * np.sin(E), np.cos(E) - e)
    return theta + np.round((E - theta) / TWO_PI) * TWO_PI


def eccentric_from_true(theta, e):
    E = np.arctan2(np.sqrt(1.0 - e * e) * np.sin(theta), e + np.cos(theta))
    return E + np.round((theta - E) / TWO_PI) * TWO_PI


def time_since_periapsis(el: OrbitalElements, body: CentralBody, theta):
    """Time (s) from periapsis passage to true anomaly ``theta`` (same revolution)."""
    M = mean_from_eccentric(eccentric_from_true(theta, el.e), el.e)
    return M / math.sqrt(body.mu / el.a**3)


def propagate_heading(el: OrbitalElements, body: CentralBody, t_since_periapsis: float) -> np.ndarray:
    """Unit inertial heading of a two-body orbit ``t`` seconds after periapsis."""
    n = math.sqrt(body.mu / el.a**3)
    E = eccentric_from_mean(n * t_since_periapsis, el.e)
    theta = float(true_from_eccentric(E, el.e))
    v = velocity_at_true_anomaly(elements_to_hodograph(el, body), perifocal_basis(el), theta)
    return v / np.linalg.norm(v)
