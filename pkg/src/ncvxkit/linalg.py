"""Dense linear-algebra kernels: least squares, truncated SVD, leading eigenvectors.

Real and complex inputs are supported; conjugate transposes are used wherever
a transpose appears on complex data.
"""

from __future__ import annotations

import numpy as np

from ._backend import jacobi_svd
from .core import RandomSource, check_finite
from .exceptions import InvalidInputError

__all__ = ["solve_least_squares", "truncated_svd", "leading_eigenvector"]

# one-sided Jacobi below this size, randomized subspace iteration above
JACOBI_SIZE_LIMIT = 64


def solve_least_squares(A, b, ridge=0.0, diagnostics=None):
    """Minimize ||A x - b||^2 + ridge * ||x||^2 via the normal equations.

    With ridge = 0 and a (numerically) singular Gram matrix, a tiny
    stabilizing ridge of 1e-12 * trace(A^H A) / p is added, which returns the
    minimum-norm solution up to that perturbation. When a ``diagnostics``
    dict is supplied, the key "stabilized" records whether this happened.

    Parameters
    ----------
    A : (n, p) array, real or complex
    b : (n,) array
    ridge : float >= 0
    """
    A = check_finite(np.asarray(A), "A")
    b = check_finite(np.asarray(b), "b")
    if A.ndim != 2 or b.ndim != 1 or A.shape[0] != b.shape[0]:
        raise InvalidInputError(
            f"shape mismatch: A is {A.shape}, b is {b.shape}"
        )
    if ridge < 0:
        raise InvalidInputError("ridge must be non-negative")
    n, p = A.shape
    G = A.conj().T @ A
    rhs = A.conj().T @ b
    if ridge > 0:
        G = G + ridge * np.eye(p)
    stabilized = False
    try:
        # Cholesky doubles as the singularity probe: the Gram matrix is PSD,
        # so failure means numerically singular.
        np.linalg.cholesky(G)
        x = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError:
        stabilized = True
        eps = 1e-12 * np.real(np.trace(G)) / p
        if eps <= 0:
            eps = 1e-12
        x = np.linalg.solve(G + eps * np.eye(p), rhs)
    if diagnostics is not None:
        diagnostics["stabilized"] = stabilized
    return x


def truncated_svd(A, r, rand: RandomSource | None = None):
    """Best rank-r factorization (U, s, V) of a real matrix A.

    U is m x r and V is n x r with orthonormal columns; s holds the top r
    singular values in non-increasing order, so ``U @ np.diag(s) @ V.T`` is a
    best rank-r Frobenius approximant of A (Eckart-Young-Mirsky).

    Small matrices (min(m, n) <= 64) go through one-sided Jacobi rotations;
    larger ones use randomized subspace iteration, deterministic given
    ``rand`` (a fixed default seed is used when omitted).
    """
    A = check_finite(np.asarray(A, dtype=float), "A")
    if A.ndim != 2:
        raise InvalidInputError("A must be a matrix")
    m, n = A.shape
    if not (1 <= r <= min(m, n)):
        raise InvalidInputError(f"rank {r} out of range for shape {A.shape}")
    if min(m, n) <= JACOBI_SIZE_LIMIT:
        U, s, V = jacobi_svd(A)
        return U[:, :r], s[:r], V[:, :r]
    return _subspace_iteration_svd(A, r, rand)


def _subspace_iteration_svd(A, r, rand, oversample=10, max_power_iters=60,
                            settle_tol=1e-11):
    """Randomized subspace iteration with QR re-orthonormalization.

    Power iterations continue until the leading singular-value estimates
    stabilize, which handles clustered spectra."""
    if rand is None:
        rand = RandomSource(0)
    m, n = A.shape
    q = min(r + oversample, min(m, n))
    Y = A @ rand.normal(n, q)
    Y, _ = np.linalg.qr(Y)
    s_prev = None
    for _ in range(max_power_iters):
        Z, Rz = np.linalg.qr(A.T @ Y)
        Y, Ry = np.linalg.qr(A @ Z)
        s_est = np.sort(np.abs(np.diag(Ry)))[::-1][:r]
        if s_prev is not None:
            denom = np.maximum(s_est, 1e-300)
            if np.max(np.abs(s_est - s_prev) / denom) <= settle_tol:
                break
        s_prev = s_est
    B = Y.T @ A  # q x n with q small: Jacobi handles the projected problem
    Ub, s, V = jacobi_svd(B)
    U = Y @ Ub
    return U[:, :r], s[:r], V[:, :r]


def leading_eigenvector(M, rand: RandomSource, tol=1e-10, sym_tol=1e-8,
                        max_iters=100_000, diagnostics=None):
    """Unit eigenvector for the largest-magnitude eigenvalue of a symmetric
    (Hermitian) matrix, by power iteration from a random start.

    Satisfies ||M v - lam v|| <= tol * ||M|| with lam = v^H M v; the sign
    (phase) of v is unspecified. When the two top eigenvalues coincide in
    magnitude, any unit vector of the invariant subspace may be returned and
    ``diagnostics["tie"]`` is set.
    """
    M = check_finite(np.asarray(M), "M")
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError("M must be square")
    p = M.shape[0]
    scale = np.linalg.norm(M, "fro")
    if scale == 0:
        v = np.zeros(p, dtype=M.dtype)
        v[0] = 1.0
        return v
    asym = np.max(np.abs(M - M.conj().T))
    if asym > sym_tol * scale:
        raise InvalidInputError(
            f"matrix is not symmetric/Hermitian (asymmetry {asym:.3e})"
        )
    M = 0.5 * (M + M.conj().T)

    if np.iscomplexobj(M):
        v = rand.complex_normal(p)
    else:
        v = rand.normal(p)
    v = v / np.linalg.norm(v)
    lam = 0.0
    for _ in range(max_iters):
        w = M @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:  # started in the null space; restart deterministically
            v = np.zeros(p, dtype=M.dtype)
            v[0] = 1.0
            continue
        v_new = w / nw
        lam = np.real(np.vdot(v_new, M @ v_new))
        if np.linalg.norm(M @ v_new - lam * v_new) <= tol * scale:
            return v_new
        v = v_new

    # Power iteration did not settle: either an extremely slow gap or a
    # +/- lambda pair. Split the invariant subspace spanned by {v, Mv}.
    w = M @ v
    sigma = np.linalg.norm(w)
    if sigma > 0:
        for cand in (v + w / sigma, v - w / sigma):
            nc = np.linalg.norm(cand)
            if nc > 1e-8:
                cand = cand / nc
                lam = np.real(np.vdot(cand, M @ cand))
                if np.linalg.norm(M @ cand - lam * cand) <= tol * scale:
                    if diagnostics is not None:
                        diagnostics["tie"] = True
                    return cand
    if diagnostics is not None:
        diagnostics["tie"] = True
        diagnostics["residual"] = float(np.linalg.norm(M @ v - lam * v) / scale)
    return v
