"""Synthetic heading observations from a truth orbit."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .hodograph import (
    CentralBody,
    HeadingObservation,
    OrbitalElements,
    elements_to_hodograph,
    perifocal_basis,
    velocity_at_true_anomaly,
)
from .kepler import propagate_heading, time_since_periapsis


@dataclass(frozen=True)
class Scenario:
    """Truth orbit plus sampling and noise settings.

    Exactly one of ``true_anomalies_deg`` and ``times_s`` (time since
    periapsis) selects the sample points.
    """

    elements: OrbitalElements
    body: CentralBody
    true_anomalies_deg: tuple[float, ...] | None = None
    times_s: tuple[float, ...] | None = None
    noise_sigma_deg: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if (self.true_anomalies_deg is None) == (self.times_s is None):
            raise ValueError("give exactly one of true_anomalies_deg or times_s")
        points = self.true_anomalies_deg if self.times_s is None else self.times_s
        object.__setattr__(self, "true_anomalies_deg" if self.times_s is None else "times_s",
                           tuple(float(p) for p in points))
        if len(points) == 0:
            raise ValueError("at least one sample point is required")
        if np.any(np.diff(points) <= 0):
            raise ValueError("sample points must be strictly increasing")
        if not self.noise_sigma_deg >= 0:
            raise ValueError("noise_sigma_deg must be non-negative")

    @property
    def n_observations(self) -> int:
        return len(self.true_anomalies_deg or self.times_s)


def observation_rng(seed: int, index: int) -> np.random.Generator:
    """Independent PCG64 stream for observation ``index`` of a scenario seeded ``seed``."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(index,))))


def _tangent_basis(s: np.ndarray):
    """Two unit vectors completing ``s`` to an orthonormal triad."""
    helper = np.zeros(3)
    helper[np.argmin(np.abs(s))] = 1.0
    u = np.cross(s, helper)
    u /= np.linalg.norm(u)
    return u, np.cross(s, u)


def perturb_heading(s, sigma_deg: float, rng: np.random.Generator) -> np.ndarray:
    """Add isotropic angular noise of ``sigma_deg`` per tangent axis to a unit heading.

    Two independent N(0, sigma) angles along an orthonormal tangent basis form
    the tilt vector; the heading is rotated by its length toward its
    direction.  The tilt angle is therefore Rayleigh(sigma) and its azimuth is
    uniform.  ``sigma_deg == 0`` returns the input unchanged and consumes no
    random numbers.
    """
    s = np.asarray(s, dtype=float)
    if sigma_deg == 0:
        return s
    n1, n2 = math.radians(sigma_deg) * rng.standard_normal(2)
    tilt = math.hypot(n1, n2)
    if tilt == 0.0:
        return s
    u, v = _tangent_basis(s)
    direction = (n1 * u + n2 * v) / tilt
    out = math.cos(tilt) * s + math.sin(tilt) * direction
    return out / np.linalg.norm(out)


def truth_headings(sc: Scenario) -> tuple[np.ndarray, np.ndarray]:
    """Noise-free unit headings and their times since periapsis."""
    el, body = sc.elements, sc.body
    if sc.times_s is not None:
        times = np.array(sc.times_s)
        S = np.array([propagate_heading(el, body, t) for t in times])
        return S, times
    theta = np.radians(sc.true_anomalies_deg)
    V = velocity_at_true_anomaly(elements_to_hodograph(el, body), perifocal_basis(el), theta)
    return V / np.linalg.norm(V, axis=1, keepdims=True), time_since_periapsis(el, body, theta)


def generate_observations(sc: Scenario) -> list[HeadingObservation]:
    S, times = truth_headings(sc)
    return [HeadingObservation(perturb_heading(s, sc.noise_sigma_deg, observation_rng(sc.seed, k)), t)
            for k, (s, t) in enumerate(zip(S, times))]


def evenly_spaced_anomalies(first_deg: float, last_deg: float, count: int) -> tuple[float, ...]:
    return tuple(float(v) for v in np.linspace(first_deg, last_deg, count))


def lunar_example_elements() -> OrbitalElements:
    """Low lunar orbit used for the reference example."""
    return OrbitalElements.from_degrees(2173.4, 0.15, 65.0, 70.0, 20.0)


LUNAR_FOUR_ANOMALIES: Sequence[float] = (5.0, 70.0, 140.0, 235.0)
LUNAR_TEN_ANOMALIES: Sequence[float] = evenly_spaced_anomalies(15.0, 330.0, 10)


MOON_RADIUS_KM = 1737.4


def random_orbit(rng: np.random.Generator, body_radius: float = MOON_RADIUS_KM,
                 a_scale=(1.1, 10.0), e_range=(0.0, 0.9)) -> OrbitalElements:
    """Elliptical orbit with isotropic orientation.

    ``a`` is uniform in ``a_scale`` times the body radius, ``e`` uniform in
    ``e_range``.
    """
    a = rng.uniform(*a_scale) * body_radius
    e = rng.uniform(*e_range)
    inc = math.acos(rng.uniform(-1.0, 1.0))
    raan, argp = (float(v) for v in rng.uniform(0.0, 2.0 * math.pi, 2))
    return OrbitalElements(a, e, inc, raan, argp)


def spread_anomalies(rng: np.random.Generator, count: int, arc_deg=(230.0, 330.0),
                     jitter: float = 0.25) -> tuple[float, ...]:
    """``count`` increasing true anomalies spread over a random arc.

    The arc length is uniform in ``arc_deg`` and starts anywhere on the orbit;
    interior points are jittered by up to ``jitter`` of the nominal spacing.
    """
    arc = rng.uniform(*arc_deg)
    start = rng.uniform(0.0, 360.0)
    spacing = arc / (count - 1)
    offsets = np.arange(count) * spacing
    offsets[1:-1] += rng.uniform(-jitter, jitter, count - 2) * spacing
    return tuple(float(v) for v in start + offsets)
