"""Orbit-plane estimation and the intermediate in-plane frame.

All headings of a Keplerian orbit are perpendicular to the orbit normal, so
the normal is the (least-squares) null vector of the stacked headings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .hodograph import TWO_PI, HeadingObservation

# Required separation between the second and third singular values.
DEGENERACY_RATIO = 10.0


class DegenerateGeometryError(ValueError):
    pass


@dataclass(frozen=True)
class NormalFit:
    w_hat: np.ndarray
    residual: float  # max |s_i . w_hat|
    singular_values: np.ndarray


@dataclass(frozen=True)
class PlaneFrame:
    a_hat: np.ndarray
    b_hat: np.ndarray
    w_hat: np.ndarray

    @property
    def T(self) -> np.ndarray:
        """Inertial -> in-plane rotation with rows a_hat, b_hat, w_hat."""
        return np.vstack([self.a_hat, self.b_hat, self.w_hat])


def time_ordered(observations: Sequence[HeadingObservation]) -> list[HeadingObservation]:
    return sorted(observations, key=lambda ob: ob.t)


def _winding(S: np.ndarray, w: np.ndarray) -> float:
    """Sum of successive heading rotations about ``w``, each wrapped to [0, 2pi)."""
    cross = np.cross(S[:-1], S[1:]) @ w
    dot = np.einsum("ij,ij->i", S[:-1], S[1:])
    return float(np.sum(np.mod(np.arctan2(cross, dot), TWO_PI)))


def estimate_normal(observations: Sequence[HeadingObservation]) -> NormalFit:
    """Unit orbit normal from two or more heading observations.

    The sign is chosen so the headings rotate positively about the normal as
    time advances.  Heading angle is monotone in time, so over less than one
    revolution the correct sign gives a total winding below 2pi while the
    flipped sign gives more than 2pi(m-2); for m >= 3 the choice is therefore
    unambiguous even when successive headings are more than 180 deg apart.
    """
    if len(observations) < 2:
        raise ValueError("at least two heading observations are required")
    S = np.array([ob.s for ob in time_ordered(observations)])
    _, sv, vt = np.linalg.svd(S, full_matrices=True)
    sv = np.concatenate([sv, np.zeros(3 - sv.size)])
    if sv[1] <= max(DEGENERACY_RATIO * sv[2], 1e-8 * sv[0]):
        raise DegenerateGeometryError(
            f"headings do not span a plane (singular values {sv.tolist()})")
    w = vt[2]
    if _winding(S, -w) < _winding(S, w):
        w = -w
    w = w / np.linalg.norm(w)
    return NormalFit(w_hat=w, residual=float(np.max(np.abs(S @ w))), singular_values=sv)


def build_frame(w_hat, s_ref) -> PlaneFrame:
    """In-plane basis with ``b_hat ~ s_ref x w_hat`` and ``a_hat = b_hat x w_hat``.

    For a heading lying in the plane this makes ``a_hat = -s_ref``.
    """
    w_hat = np.asarray(w_hat, dtype=float)
    b = np.cross(np.asarray(s_ref, dtype=float), w_hat)
    bn = np.linalg.norm(b)
    if bn < 1e-9:
        raise DegenerateGeometryError("reference heading is parallel to the orbit normal")
    b = b / bn
    return PlaneFrame(a_hat=np.cross(b, w_hat), b_hat=b, w_hat=w_hat)


def to_plane(frame: PlaneFrame, v) -> np.ndarray:
    """Components of ``v`` (or rows of ``v``) along a_hat, b_hat, w_hat."""
    return np.asarray(v, dtype=float) @ frame.T.T


def from_plane(frame: PlaneFrame, v_prime) -> np.ndarray:
    v_prime = np.asarray(v_prime, dtype=float)
    if v_prime.shape[-1] == 2:
        v_prime = np.concatenate([v_prime, np.zeros(v_prime.shape[:-1] + (1,))], axis=-1)
    return v_prime @ frame.T
