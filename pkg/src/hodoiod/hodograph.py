"""Orbital hodograph algebra.

For a Keplerian orbit the tip of the velocity vector traces a circle of
radius ``R = mu / h`` centred at ``c = R * e * q_hat``.  This module converts
between classical elements and those hodograph parameters and evaluates the
heading-angle / eccentric-anomaly relations that follow from the geometry.

Units are km, km/s, s and radians throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Below this eccentricity the periapsis direction is treated as undefined.
E_MIN = 1e-3

TWO_PI = 2.0 * math.pi


class NonEllipticalError(ValueError):
    """Raised when parameters describe a parabolic or hyperbolic orbit."""


@dataclass(frozen=True)
class CentralBody:
    mu: float  # km^3/s^2

    def __post_init__(self):
        if not self.mu > 0:
            raise ValueError(f"gravitational parameter must be positive, got {self.mu}")


MOON = CentralBody(mu=4902.8)


@dataclass(frozen=True)
class OrbitalElements:
    """Classical elements of an elliptical orbit (angles in radians).

    ``periapsis_defined`` is False when the orbit is effectively circular;
    ``argp`` is then 0 by convention.  ``node_defined`` is False for
    equatorial orbits, where ``raan`` is 0 and ``argp`` is measured from the
    inertial x axis.
    """

    a: float
    e: float
    inc: float
    raan: float
    argp: float
    periapsis_defined: bool = True
    node_defined: bool = True

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"semi-major axis must be positive, got {self.a}")
        if not 0.0 <= self.e < 1.0:
            raise NonEllipticalError(f"eccentricity must lie in [0, 1), got {self.e}")
        if not 0.0 <= self.inc <= math.pi:
            raise ValueError(f"inclination must lie in [0, pi], got {self.inc}")

    @classmethod
    def from_degrees(cls, a, e, inc, raan, argp) -> OrbitalElements:
        return cls(a, e, math.radians(inc), math.radians(raan), math.radians(argp))

    def period(self, body: CentralBody) -> float:
        return TWO_PI * math.sqrt(self.a**3 / body.mu)


@dataclass(frozen=True)
class PerifocalBasis:
    p_hat: np.ndarray
    q_hat: np.ndarray
    w_hat: np.ndarray

    def matrix(self) -> np.ndarray:
        """Rows are p_hat, q_hat, w_hat (inertial -> perifocal)."""
        return np.vstack([self.p_hat, self.q_hat, self.w_hat])


@dataclass(frozen=True)
class HodographParams:
    R: float
    c: np.ndarray = field(repr=False)
    w_hat: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        object.__setattr__(self, "w_hat", np.asarray(self.w_hat, dtype=float))
        if not self.R > 0:
            raise ValueError(f"hodograph radius must be positive, got {self.R}")
        if np.linalg.norm(self.c) >= self.R:
            raise NonEllipticalError("hodograph center lies on or outside the circle")

    @property
    def eccentricity(self) -> float:
        return float(np.linalg.norm(self.c)) / self.R

    def __repr__(self):
        return (f"HodographParams(R={self.R!r}, c={self.c.tolist()!r}, "
                f"w_hat={self.w_hat.tolist()!r})")


@dataclass(frozen=True)
class HeadingObservation:
    """Inertial velocity direction ``s`` observed at time ``t`` (s).

    Headings are stored unit-norm; any positive scale is accepted on input.
    """

    s: np.ndarray
    t: float

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float).reshape(3)
        norm = np.linalg.norm(s)
        if not norm > 0 or not np.isfinite(norm):
            raise ValueError("heading must be a finite non-zero vector")
        object.__setattr__(self, "s", s / norm)
        object.__setattr__(self, "t", float(self.t))


def perifocal_basis(el: OrbitalElements) -> PerifocalBasis:
    """Perifocal triad from the 3-1-3 rotation (raan, inc, argp)."""
    cO, sO = math.cos(el.raan), math.sin(el.raan)
    ci, si = math.cos(el.inc), math.sin(el.inc)
    cw, sw = math.cos(el.argp), math.sin(el.argp)
    p = np.array([cO * cw - sO * sw * ci, sO * cw + cO * sw * ci, sw * si])
    q = np.array([-cO * sw - sO * cw * ci, -sO * sw + cO * cw * ci, cw * si])
    w = np.array([sO * si, -cO * si, ci])
    return PerifocalBasis(p, q, w)


def basis_from_hodograph(hp: HodographParams) -> PerifocalBasis:
    """Recover ``{p, q, w}`` from the hodograph; needs a non-circular orbit."""
    cn = np.linalg.norm(hp.c)
    if cn / hp.R <= E_MIN:
        raise ValueError("perifocal basis is undefined for an effectively circular orbit")
    q = hp.c / cn
    p = np.cross(q, hp.w_hat)
    return PerifocalBasis(p / np.linalg.norm(p), q, hp.w_hat)


def elements_to_hodograph(el: OrbitalElements, body: CentralBody) -> HodographParams:
    h = math.sqrt(body.mu * el.a * (1.0 - el.e**2))
    R = body.mu / h
    basis = perifocal_basis(el)
    return HodographParams(R=R, c=R * el.e * basis.q_hat, w_hat=basis.w_hat)


def _orientation(w_hat: np.ndarray, p_hat: np.ndarray | None):
    """(inc, raan, argp, node_defined) from the orbit normal and periapsis direction."""
    inc = math.atan2(math.hypot(w_hat[0], w_hat[1]), w_hat[2])
    node = np.array([-w_hat[1], w_hat[0], 0.0])
    node_norm = np.linalg.norm(node)
    node_defined = bool(node_norm > 1e-12)
    if node_defined:
        node /= node_norm
        raan = math.atan2(w_hat[0], -w_hat[1]) % TWO_PI
    else:
        node = np.array([1.0, 0.0, 0.0])
        raan = 0.0
    if p_hat is None:
        return inc, raan, 0.0, node_defined
    argp = math.atan2(float(np.cross(node, p_hat) @ w_hat), float(node @ p_hat)) % TWO_PI
    return inc, raan, argp, node_defined


def hodograph_to_elements(hp: HodographParams, body: CentralBody) -> OrbitalElements:
    """Classical elements from hodograph parameters.

    Shape follows from ``e = |c|/R`` and ``a = mu / (R^2 - c.c)``.  Orientation
    uses ``w_hat`` and ``q_hat = c/|c|``; when ``e <= E_MIN`` the argument of
    periapsis is reported as 0 with ``periapsis_defined=False``.
    """
    cc = float(hp.c @ hp.c)
    if cc >= hp.R**2:
        raise NonEllipticalError("hodograph center lies on or outside the circle")
    a = body.mu / (hp.R**2 - cc)
    e = math.sqrt(cc) / hp.R
    periapsis_defined = e > E_MIN
    p_hat = basis_from_hodograph(hp).p_hat if periapsis_defined else None
    inc, raan, argp, node_defined = _orientation(hp.w_hat, p_hat)
    return OrbitalElements(a, e, inc, raan, argp,
                           periapsis_defined=periapsis_defined, node_defined=node_defined)


def velocity_at_true_anomaly(hp: HodographParams, basis: PerifocalBasis, theta):
    """Velocity (km/s) on the hodograph circle at true anomaly ``theta``."""
    theta = np.asarray(theta, dtype=float)
    st, ct = np.sin(theta)[..., None], np.cos(theta)[..., None]
    return hp.R * (-st * basis.p_hat + ct * basis.q_hat) + hp.c


def heading_angle(e, theta):
    """Angle from q_hat to the velocity, positive along the motion, in [0, 2pi)."""
    return np.mod(np.arctan2(np.sin(theta), e + np.cos(theta)), TWO_PI)


def eccentric_anomaly_from_heading(hp: HodographParams, s) -> float:
    """Eccentric anomaly in (-pi, pi] from a single heading direction.

    Only the direction of ``s`` matters.  A zero-eccentricity hodograph has no
    reference direction; the solver's regularized form handles that case.
    """
    s = np.asarray(s, dtype=float)
    cc = float(hp.c @ hp.c)
    if cc == 0.0:
        raise ValueError("hodograph center is zero; use solver.mean_anomaly_g "
                         "with its regularized reference direction")
    y = math.sqrt(hp.R**2 - cc) * float(hp.w_hat @ np.cross(hp.c, s))
    x = hp.R * float(hp.c @ s)
    return math.atan2(y, x)
