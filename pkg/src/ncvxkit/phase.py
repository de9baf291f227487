"""Phase retrieval from magnitude-only complex Gaussian measurements.

Provides instance synthesis, the phase-invariant distance, spectral
initialization, alternating phase/signal estimation, and gradient descent on
the squared-magnitude residual objective.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .core import ConvergenceTrace, RandomSource, check_finite
from .exceptions import DivergedError, InvalidInputError
from .linalg import leading_eigenvector, solve_least_squares

__all__ = [
    "PhaseInstance",
    "gen_phase_instance",
    "dist_mod_phase",
    "spectral_init",
    "gsam_run",
    "wf_run",
    "wf_objective",
    "wf_gradient",
    "estimate_phases",
]


@dataclass
class PhaseInstance:
    """Magnitude-only measurements y_mag_k = |x_k^T theta*| of a unit-norm
    complex signal under a complex Gaussian design (entries N(0,1) + i N(0,1))."""

    X: np.ndarray
    y_mag: np.ndarray
    theta_star: np.ndarray
    seed: int

    def to_json(self) -> str:
        n, p = self.X.shape

        def interleave(z):
            flat = np.asarray(z).ravel()
            out = np.empty(2 * flat.size)
            out[0::2] = flat.real  # little-endian pairs: real first
            out[1::2] = flat.imag
            return out.tolist()

        return json.dumps(
            {
                "n": n,
                "p": p,
                "seed": self.seed,
                "X_re_im": interleave(self.X),
                "y_mag": self.y_mag.tolist(),
                "theta_star_re_im": interleave(self.theta_star),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "PhaseInstance":
        d = json.loads(text)
        n, p = int(d["n"]), int(d["p"])

        def deinterleave(vals, shape):
            arr = np.asarray(vals, dtype=float)
            return (arr[0::2] + 1j * arr[1::2]).reshape(shape)

        return cls(
            X=deinterleave(d["X_re_im"], (n, p)),
            y_mag=np.asarray(d["y_mag"], dtype=float),
            theta_star=deinterleave(d["theta_star_re_im"], (p,)),
            seed=int(d["seed"]),
        )


def gen_phase_instance(n, p, rand: RandomSource) -> PhaseInstance:
    """Complex Gaussian design and a random unit-norm signal; only response
    magnitudes are recorded."""
    if n < 1 or p < 1:
        raise InvalidInputError("n and p must be >= 1")
    X = rand.split("design").complex_normal(n, p)
    theta = rand.split("signal").complex_normal(p)
    theta = theta / np.linalg.norm(theta)
    y_mag = np.abs(X @ theta)
    return PhaseInstance(X=X, y_mag=y_mag, theta_star=theta, seed=rand.seed)


def dist_mod_phase(a, b) -> float:
    """min over phi of ||e^{i phi} a - b||_2, the distance modulo a global
    phase (equal to sqrt(||a||^2 + ||b||^2 - 2 |<a, b>|)).

    Evaluated at the argmin phase e^{i phi} = <a, b> / |<a, b>| rather than
    through the closed form, which loses half the significant digits to
    cancellation when a and b are phase-aligned copies."""
    a = check_finite(np.asarray(a), "a")
    b = check_finite(np.asarray(b), "b")
    if a.shape != b.shape:
        raise InvalidInputError("length mismatch")
    inner = np.vdot(a, b)
    phase = inner / abs(inner) if inner != 0 else 1.0
    return float(np.linalg.norm(phase * a - b))


def _weighted_moment_matrix(X, y_mag):
    """(1/n) sum_k |y_k|^2 conj(x_k) x_k^T: Hermitian PSD by construction."""
    w = y_mag**2
    return (X.conj().T * w) @ X / X.shape[0]


def spectral_init(X, y_mag, subset=None, rand: RandomSource | None = None):
    """Unit-norm leading eigenvector of the magnitude-weighted second-moment
    matrix of the (sub)sampled measurements."""
    X = check_finite(np.asarray(X), "X")
    y_mag = check_finite(np.asarray(y_mag, dtype=float), "y_mag")
    if subset is not None:
        subset = np.asarray(subset, dtype=int)
        if subset.size == 0:
            raise InvalidInputError("subset must be nonempty")
        X = X[subset]
        y_mag = y_mag[subset]
    M = _weighted_moment_matrix(X, y_mag)
    if rand is None:
        rand = RandomSource(0)
    v = leading_eigenvector(M, rand, tol=1e-10)
    return v / np.linalg.norm(v)


def estimate_phases(X, theta):
    """Unit-modulus phases of the predicted responses; exact zeros get
    phase 1 (any unit value is optimal there, and determinism wins)."""
    r = X @ theta
    phases = np.ones_like(r)
    nz = r != 0
    phases[nz] = r[nz] / np.abs(r[nz])
    return phases


@dataclass
class PhaseResult:
    theta: np.ndarray
    trace: ConvergenceTrace
    flags: dict


def gsam_run(inst: PhaseInstance, eps, rand: RandomSource) -> PhaseResult:
    """Alternating phase estimation and complex least squares.

    Runs T = ceil(log 1/eps) alternations on T+1 disjoint sample blocks
    (equal-size contiguous blocks after a seeded shuffle): block 0 feeds the
    spectral initialization, block t the t-th alternation.
    """
    if not (0 < eps < 1):
        raise InvalidInputError("eps must lie in (0, 1)")
    n, p = inst.X.shape
    T = math.ceil(math.log(1.0 / eps))
    if n < (T + 1) * p:
        raise InvalidInputError(
            f"need n >= (T+1) p = {(T + 1) * p} samples for {T} alternations"
        )
    perm = rand.split("partition").permutation(n)
    blocks = np.array_split(perm, T + 1)

    theta = spectral_init(inst.X, inst.y_mag, subset=blocks[0],
                          rand=rand.split("init"))
    trace = ConvergenceTrace()
    t0 = time.perf_counter()
    for t in range(1, T + 1):
        S = blocks[t]
        Xs = inst.X[S]
        phases = estimate_phases(Xs, theta)
        theta = solve_least_squares(Xs, inst.y_mag[S] * phases)
        obj = float(np.sum((np.abs(inst.X @ theta) - inst.y_mag) ** 2))
        err = dist_mod_phase(theta, inst.theta_star)
        trace.record(t, obj, err, time.perf_counter() - t0)
    return PhaseResult(theta=theta, trace=trace, flags={"alternations": T})


def wf_objective(X, y_mag, theta) -> float:
    """sum_k (|y_k|^2 - |x_k^T theta|^2)^2."""
    return float(np.sum((y_mag**2 - np.abs(X @ theta) ** 2) ** 2))


def wf_gradient(X, y_mag, theta):
    """Gradient of :func:`wf_objective` over the 2p real coordinates,
    packed as a complex vector: 4 sum_k (|x_k^T theta|^2 - |y_k|^2)
    conj(x_k) (x_k^T theta)."""
    r = X @ theta
    coef = np.abs(r) ** 2 - y_mag**2
    return 4.0 * (X.conj().T @ (coef * r))


def wf_run(inst: PhaseInstance, eta=None, T=500) -> PhaseResult:
    """Gradient descent on the squared-magnitude residuals from a spectral
    start over all samples.

    The update subtracts 2 eta sum_k (|x_k^T theta|^2 - |y_k|^2) times the
    per-sample outer-product action on theta (half the full real-coordinate
    gradient). The default step 0.1 / (n * mean(y_mag^2)) is scale
    invariant. A step that increases the objective is retried at half the
    length; halvings are counted in the flags.
    """
    n, p = inst.X.shape
    if eta is None:
        eta = 0.1 / (n * float(np.mean(inst.y_mag**2)))
    if eta <= 0:
        raise InvalidInputError("eta must be positive")
    theta = spectral_init(inst.X, inst.y_mag)
    trace = ConvergenceTrace()
    flags = {"eta_halvings": 0}
    t0 = time.perf_counter()
    obj = wf_objective(inst.X, inst.y_mag, theta)
    for t in range(1, T + 1):
        step = theta - (eta / 2.0) * wf_gradient(inst.X, inst.y_mag, theta)
        new_obj = wf_objective(inst.X, inst.y_mag, step)
        while new_obj > obj and flags["eta_halvings"] < 60:
            eta /= 2.0
            flags["eta_halvings"] += 1
            step = theta - (eta / 2.0) * wf_gradient(inst.X, inst.y_mag, theta)
            new_obj = wf_objective(inst.X, inst.y_mag, step)
        theta = step
        obj = new_obj
        if not np.isfinite(obj) or obj > 1e15:
            raise DivergedError("WF objective exploded", last_iterate=theta,
                                trace=trace)
        err = dist_mod_phase(theta, inst.theta_star)
        trace.record(t, obj, err, time.perf_counter() - t0)
    return PhaseResult(theta=theta, trace=trace, flags=flags)
