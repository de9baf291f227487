"""Pure-numpy implementations of the hot kernels.

These mirror the compiled extension in ``_kernels.pyx`` and are selected at
import time when the extension is unavailable (or when ``NCVXKIT_PURE_PY`` is
set). Both backends implement the same algorithms and must agree to floating
point round-off; the test suite runs the kernel contract against whichever
backends are importable.
"""

import numpy as np

BACKEND_NAME = "python"


def jacobi_svd(A, tol=1e-12, max_sweeps=60):
    """Full SVD of a real matrix by one-sided Jacobi rotations.

    Columns of a working copy of ``A`` are repeatedly rotated in pairs until
    they are mutually orthogonal, which diagonalizes the Gram matrix A^T A.
    Returns (U, s, V) with ``A = U @ diag(s) @ V.T``, singular values sorted
    in non-increasing order. For m < n the problem is transposed internally.
    """
    A = np.array(A, dtype=float, order="F", copy=True)
    m, n = A.shape
    if m < n:
        U, s, V = jacobi_svd(A.T, tol=tol, max_sweeps=max_sweeps)
        return V, s, U

    V = np.eye(n)
    # scale reference for the rotation threshold
    ref = np.linalg.norm(A, "fro") ** 2 / max(n, 1)
    if ref == 0.0:
        return np.eye(m)[:, :n], np.zeros(n), V

    for _ in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                ai = A[:, i]
                aj = A[:, j]
                aii = ai @ ai
                ajj = aj @ aj
                aij = ai @ aj
                if abs(aij) <= tol * np.sqrt(aii * ajj) or aij == 0.0:
                    continue
                off = max(off, abs(aij))
                tau = (ajj - aii) / (2.0 * aij)
                t = np.sign(tau) / (abs(tau) + np.sqrt(1.0 + tau * tau))
                if tau == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(1.0 + t * t)
                s_ = c * t
                A[:, i], A[:, j] = c * ai - s_ * aj, s_ * ai + c * aj
                vi = V[:, i].copy()
                vj = V[:, j].copy()
                V[:, i] = c * vi - s_ * vj
                V[:, j] = s_ * vi + c * vj
        if off <= tol * np.sqrt(ref):
            break

    sigma = np.linalg.norm(A, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    A = A[:, order]
    V = V[:, order]
    U = np.zeros((m, n))
    for k in range(n):
        if sigma[k] > tol * max(sigma[0], 1e-300):
            U[:, k] = A[:, k] / sigma[k]
        else:
            # null direction: complete to an orthonormal basis
            u = _orthogonal_complement_vector(U[:, :k])
            U[:, k] = u
            sigma[k] = 0.0
    return U, sigma, V


def _orthogonal_complement_vector(U):
    """A unit vector orthogonal to the columns of U (deterministic)."""
    m = U.shape[0]
    for idx in range(m):
        v = np.zeros(m)
        v[idx] = 1.0
        if U.shape[1]:
            v -= U @ (U.T @ v)
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            return v / nrm
    raise RuntimeError("could not complete orthonormal basis")


def quartic_form(T, v):
    """T(v, v, v, v) for a dense 4th-order tensor."""
    return float(np.einsum("ijkl,i,j,k,l->", T, v, v, v, v))


def quartic_contract(T, v):
    """T(I, v, v, v): contract v into the last three modes."""
    return np.einsum("ijkl,j,k,l->i", T, v, v, v)
