"""Exact projections onto the constraint sets used by the solvers.

Covers the L2 and L1 balls (convex) and the sparse and low-rank sets
(non-convex), plus the unit sphere used as a manifold constraint. All ties
are broken deterministically so repeated runs are reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import RandomSource, check_finite
from .exceptions import InvalidInputError
from .linalg import truncated_svd

__all__ = [
    "hard_threshold",
    "project_low_rank",
    "project_l2_ball",
    "project_l1_ball",
    "project_unit_sphere",
    "ProjectionReport",
    "L2Ball",
    "L1Ball",
    "Sparse",
    "LowRank",
    "UnitSphere",
    "project",
]


def hard_threshold(z, s):
    """Keep the s largest-magnitude coordinates of z, zero the rest.

    Ties in magnitude are broken toward the lower index. The output is the
    closest s-sparse vector to z.
    """
    z = check_finite(np.asarray(z), "z")
    p = z.shape[0]
    if not (1 <= s <= p):
        raise InvalidInputError(f"sparsity {s} out of range 1..{p}")
    if s == p:
        return z.copy()
    # stable sort on -|z| keeps the lowest index first among ties
    order = np.argsort(-np.abs(z), kind="stable")
    out = np.zeros_like(z)
    keep = order[:s]
    out[keep] = z[keep]
    return out


def project_low_rank(A, r, rand: RandomSource | None = None):
    """Closest (Frobenius) matrix of rank <= r, via truncated SVD."""
    A = np.asarray(A, dtype=float)
    U, s, V = truncated_svd(A, r, rand)
    return (U * s) @ V.T


def project_l2_ball(z, radius):
    """z itself inside the ball, else the radial rescaling onto the boundary."""
    if radius <= 0:
        raise InvalidInputError("radius must be positive")
    z = check_finite(np.asarray(z), "z")
    nrm = np.linalg.norm(z)
    if nrm <= radius:
        return z.copy()
    return (radius / nrm) * z


def project_l1_ball(z, radius):
    """Euclidean projection onto the L1 ball by sort-based soft thresholding.

    Returns z unchanged inside the ball; otherwise applies
    sign(z_i) * max(|z_i| - theta, 0) with the threshold theta determined
    from the sorted magnitudes.
    """
    if radius <= 0:
        raise InvalidInputError("radius must be positive")
    z = check_finite(np.asarray(z, dtype=float), "z")
    mags = np.abs(z)
    if mags.sum() <= radius:
        return z.copy()
    u = np.sort(mags)[::-1]
    css = np.cumsum(u)
    idx = np.arange(1, z.size + 1)
    rho = np.max(np.nonzero(u - (css - radius) / idx > 0)[0]) + 1
    theta = (css[rho - 1] - radius) / rho
    return np.sign(z) * np.maximum(mags - theta, 0.0)


def project_unit_sphere(z):
    """Normalize onto the unit sphere. The zero vector has no projection."""
    z = check_finite(np.asarray(z), "z")
    nrm = np.linalg.norm(z)
    if nrm < 1e-300:
        raise InvalidInputError("cannot project the zero vector onto the sphere")
    return z / nrm


# -- set descriptors and reporting ----------------------------------------


@dataclass(frozen=True)
class L2Ball:
    radius: float

    def project(self, z):
        return project_l2_ball(z, self.radius)


@dataclass(frozen=True)
class L1Ball:
    radius: float

    def project(self, z):
        return project_l1_ball(z, self.radius)


@dataclass(frozen=True)
class Sparse:
    s: int

    def project(self, z):
        return hard_threshold(z, self.s)


@dataclass(frozen=True)
class LowRank:
    r: int

    def project(self, z):
        return project_low_rank(z, self.r)


@dataclass(frozen=True)
class UnitSphere:
    def project(self, z):
        return project_unit_sphere(z)


@dataclass
class ProjectionReport:
    """Input/output pair of a projection together with the attained distance."""

    input: np.ndarray
    output: np.ndarray
    distance: float
    set_descriptor: object


def project(descriptor, z) -> ProjectionReport:
    """Apply a set descriptor's projection and report the distance moved."""
    out = descriptor.project(z)
    return ProjectionReport(
        input=np.asarray(z),
        output=out,
        distance=float(np.linalg.norm(np.asarray(z) - out)),
        set_descriptor=descriptor,
    )
