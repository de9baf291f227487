"""Orthogonal 4th-order tensor decomposition via noisy projected descent on
the sphere, one component at a time with deflation."""

from __future__ import annotations

import numpy as np

from ._backend import quartic_contract, quartic_form
from .core import RandomSource, check_finite, sample_unit_sphere
from .descent import ObjectiveOracle, pngd_run
from .exceptions import DeflationError, InvalidInputError
from .projections import project_unit_sphere

__all__ = [
    "MAX_DIM",
    "tensor_from_components",
    "contract",
    "lrtd_component",
    "decompose",
    "tensor_to_flat",
    "tensor_from_flat",
]

# dense p^4 storage: keep desk scale honest
MAX_DIM = 64

COMPONENT_ORTH_TOL = 1e-8
DEFLATION_OVERLAP_LIMIT = 0.5


def _as_components(components):
    U = check_finite(np.asarray(components, dtype=float), "components")
    if U.ndim == 1:
        U = U.reshape(-1, 1)
    if U.ndim != 2:
        raise InvalidInputError("components must be a p x r array")
    return U


def tensor_from_components(components):
    """Sum of 4-fold outer products of orthonormal unit vectors.

    ``components`` is p x r (columns are the components). Norms must be 1 and
    pairwise inner products zero, both within 1e-8.
    """
    U = _as_components(components)
    p, r = U.shape
    if p > MAX_DIM:
        raise InvalidInputError(f"dimension {p} exceeds the dense cap {MAX_DIM}")
    gram = U.T @ U
    if np.abs(np.diag(gram) - 1.0).max() > COMPONENT_ORTH_TOL:
        raise InvalidInputError("components must have unit norm")
    off = gram - np.diag(np.diag(gram))
    if r > 1 and np.abs(off).max() > COMPONENT_ORTH_TOL:
        raise InvalidInputError("components must be pairwise orthogonal")
    return np.einsum("ia,ja,ka,la->ijkl", U, U, U, U)


def contract(T, v, holds):
    """Multilinear contraction of a 4th-order tensor with ``holds`` identity
    slots: holds=0 gives the scalar T(v,v,v,v), holds=1 the vector
    T(I,v,v,v), holds=2 a matrix, holds=3 a 3rd-order tensor."""
    T = np.asarray(T, dtype=float)
    v = check_finite(np.asarray(v, dtype=float), "v")
    if T.ndim != 4 or len(set(T.shape)) != 1:
        raise InvalidInputError("T must be a p x p x p x p array")
    if v.shape[0] != T.shape[0]:
        raise InvalidInputError("dimension mismatch between T and v")
    if holds == 0:
        return quartic_form(T, v)
    if holds == 1:
        return quartic_contract(T, v)
    if holds == 2:
        return np.einsum("ijkl,k,l->ij", T, v, v)
    if holds == 3:
        return np.einsum("ijkl,l->ijk", T, v)
    raise InvalidInputError("holds must be one of 0, 1, 2, 3")


def tensor_to_flat(T):
    """Serialize a 4th-order tensor as (shape, flat row-major values)."""
    T = np.asarray(T, dtype=float)
    if T.ndim != 4:
        raise InvalidInputError("expected a 4th-order tensor")
    return list(T.shape), T.ravel(order="C").tolist()


def tensor_from_flat(shape, values):
    """Inverse of :func:`tensor_to_flat`."""
    if len(shape) != 4:
        raise InvalidInputError("expected a 4-entry shape header")
    return np.asarray(values, dtype=float).reshape(shape, order="C")


def _component_oracle(T):
    return ObjectiveOracle(
        value=lambda u: -quartic_form(T, u),
        gradient=lambda u: -4.0 * quartic_contract(T, u),
    )


def _fix_sign(u):
    """First nonzero coordinate made positive, for reproducible comparisons."""
    nz = np.flatnonzero(np.abs(u) > 1e-12)
    if nz.size and u[nz[0]] < 0:
        return -u
    return u


def lrtd_component(T, eta_max, epsilon, rand: RandomSource, restarts=5):
    """One tensor component: maximize T(u,u,u,u) on the unit sphere by noisy
    projected gradient descent from random starts, keeping the best final
    iterate over ``restarts`` runs."""
    T = np.asarray(T, dtype=float)
    p = T.shape[0]
    if restarts < 1:
        raise InvalidInputError("restarts must be >= 1")
    f = _component_oracle(T)
    best_u = None
    best_val = -np.inf
    for i in range(restarts):
        r = rand.split(i)
        u0 = sample_unit_sphere(p, r.split("init"))
        res = pngd_run(f, project_unit_sphere, u0, eta_max, epsilon,
                       r.split("noise"))
        u = res.final_point
        val = quartic_form(T, u)
        if val > best_val:
            best_val = val
            best_u = u
    return _fix_sign(best_u)


def _power_refine(T, u, iters=50, tol=1e-14):
    """Tensor power iterations u <- normalize(T(I,u,u,u)).

    Quadratically convergent near a component of an orthogonal tensor;
    removes the noise floor the stochastic search leaves behind so that
    deflation does not contaminate later rounds."""
    for _ in range(iters):
        w = quartic_contract(T, u)
        nrm = np.linalg.norm(w)
        if nrm < 1e-300:
            return u
        w = w / nrm
        if np.linalg.norm(w - u) <= tol:
            return w
        u = w
    return u


def decompose(T, r, rand: RandomSource, eta_max=0.02, epsilon=0.9, restarts=5):
    """Recover r orthonormal components by repeated single-component fits and
    deflation (subtracting the recovered 4-fold outer product).

    Each stochastic fit is polished by noiseless tensor power iterations
    before deflating. A recovered component overlapping an earlier one by
    more than 0.5 aborts with a deflation error. The returned set is
    re-orthonormalized after the pairwise-overlap check.
    """
    T = np.asarray(T, dtype=float).copy()
    if r < 1:
        raise InvalidInputError("r must be >= 1")
    found = []
    for round_idx in range(r):
        u = lrtd_component(T, eta_max, epsilon, rand.split(round_idx),
                          restarts=restarts)
        u = _fix_sign(_power_refine(T, u))
        for prior in found:
            if abs(prior @ u) > DEFLATION_OVERLAP_LIMIT:
                raise DeflationError(
                    f"component {round_idx} overlaps an earlier one "
                    f"(|<u_i, u_j>| = {abs(prior @ u):.3f})"
                )
        found.append(u)
        T -= np.einsum("i,j,k,l->ijkl", u, u, u, u)
    # Gram-Schmidt cleanup: components are near-orthonormal already
    out = []
    for u in found:
        w = u.copy()
        for q in out:
            w -= (q @ w) * q
        nrm = np.linalg.norm(w)
        if nrm < 1e-8:
            raise DeflationError("recovered components are numerically dependent")
        out.append(w / nrm)
    return np.column_stack([_fix_sign(u) for u in out])
