# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: one-sided Jacobi SVD and quartic tensor contractions.

Same algorithms as ``_kernels_py``; the Python module is the fallback twin
selected when this extension is not built.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt

cnp.import_array()

BACKEND_NAME = "compiled"


def jacobi_svd(A, double tol=1e-12, int max_sweeps=60):
    """Full SVD of a real matrix by one-sided Jacobi rotations.

    Returns (U, s, V) with A = U @ diag(s) @ V.T and s non-increasing.
    """
    A = np.asarray(A, dtype=np.float64)
    cdef Py_ssize_t m = A.shape[0]
    cdef Py_ssize_t n = A.shape[1]
    if m < n:
        Ut, st, Vt = jacobi_svd(A.T, tol=tol, max_sweeps=max_sweeps)
        return Vt, st, Ut

    cdef cnp.ndarray[cnp.float64_t, ndim=2] W = np.array(A, dtype=np.float64, order="C", copy=True)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] V = np.eye(n)
    cdef double[:, ::1] w = W
    cdef double[:, ::1] v = V

    cdef double ref = 0.0
    cdef Py_ssize_t i, j, k, sweep
    for i in range(m):
        for j in range(n):
            ref += w[i, j] * w[i, j]
    if ref == 0.0:
        return np.eye(m)[:, :n], np.zeros(n), V
    ref = ref / n

    cdef double aii, ajj, aij, off, tau, t, c, s_, wi, wj, thresh
    thresh = tol * sqrt(ref)
    for sweep in range(max_sweeps):
        off = 0.0
        for i in range(n - 1):
            for j in range(i + 1, n):
                aii = 0.0
                ajj = 0.0
                aij = 0.0
                for k in range(m):
                    wi = w[k, i]
                    wj = w[k, j]
                    aii += wi * wi
                    ajj += wj * wj
                    aij += wi * wj
                if aij == 0.0 or fabs(aij) <= tol * sqrt(aii * ajj):
                    continue
                if fabs(aij) > off:
                    off = fabs(aij)
                tau = (ajj - aii) / (2.0 * aij)
                if tau == 0.0:
                    t = 1.0
                elif tau > 0.0:
                    t = 1.0 / (tau + sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + sqrt(1.0 + tau * tau))
                c = 1.0 / sqrt(1.0 + t * t)
                s_ = c * t
                for k in range(m):
                    wi = w[k, i]
                    wj = w[k, j]
                    w[k, i] = c * wi - s_ * wj
                    w[k, j] = s_ * wi + c * wj
                for k in range(n):
                    wi = v[k, i]
                    wj = v[k, j]
                    v[k, i] = c * wi - s_ * wj
                    v[k, j] = s_ * wi + c * wj
        if off <= thresh:
            break

    sigma = np.linalg.norm(W, axis=0)
    order = np.argsort(-sigma, kind="stable")
    sigma = sigma[order]
    W = W[:, order]
    V = V[:, order]
    U = np.zeros((m, n))
    cdef double smax = sigma[0] if sigma[0] > 1e-300 else 1e-300
    for k in range(n):
        if sigma[k] > tol * smax:
            U[:, k] = W[:, k] / sigma[k]
        else:
            U[:, k] = _orthogonal_complement_vector(U[:, :k])
            sigma[k] = 0.0
    return U, sigma, V


def _orthogonal_complement_vector(U):
    m = U.shape[0]
    for idx in range(m):
        e = np.zeros(m)
        e[idx] = 1.0
        if U.shape[1]:
            e -= U @ (U.T @ e)
        nrm = np.linalg.norm(e)
        if nrm > 1e-8:
            return e / nrm
    raise RuntimeError("could not complete orthonormal basis")


def quartic_form(T, v):
    """T(v, v, v, v) for a dense symmetric 4th-order tensor."""
    cdef cnp.ndarray[cnp.float64_t, ndim=4] Tc = np.ascontiguousarray(T, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vc = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t p = vc.shape[0]
    cdef double[:, :, :, ::1] t = Tc
    cdef double[::1] x = vc
    cdef double acc = 0.0, a3, a2, a1
    cdef Py_ssize_t i, j, k, l
    for i in range(p):
        a1 = 0.0
        for j in range(p):
            a2 = 0.0
            for k in range(p):
                a3 = 0.0
                for l in range(p):
                    a3 += t[i, j, k, l] * x[l]
                a2 += a3 * x[k]
            a1 += a2 * x[j]
        acc += a1 * x[i]
    return acc


def quartic_contract(T, v):
    """T(I, v, v, v): contract v into the last three modes."""
    cdef cnp.ndarray[cnp.float64_t, ndim=4] Tc = np.ascontiguousarray(T, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] vc = np.ascontiguousarray(v, dtype=np.float64)
    cdef Py_ssize_t p = vc.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(p)
    cdef double[:, :, :, ::1] t = Tc
    cdef double[::1] x = vc
    cdef double[::1] o = out
    cdef double a3, a2, a1
    cdef Py_ssize_t i, j, k, l
    for i in range(p):
        a1 = 0.0
        for j in range(p):
            a2 = 0.0
            for k in range(p):
                a3 = 0.0
                for l in range(p):
                    a3 += t[i, j, k, l] * x[l]
                a2 += a3 * x[k]
            a1 += a2 * x[j]
        o[i] = a1
    return out
