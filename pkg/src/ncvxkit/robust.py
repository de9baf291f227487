"""Robust regression under adversarial response corruption.

Implements alternating model/active-set minimization (fully corrective,
gradient and hybrid variants), the corruption-domain reformulation solved by
generalized projected gradient descent, corrupted instance synthesis, and
empirical subset-eigenvalue estimation.
"""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .core import ConvergenceTrace, RandomSource, check_finite, sample_unit_sphere
from .descent import ObjectiveOracle, gpgd_run
from .exceptions import InvalidInputError
from .linalg import solve_least_squares
from .projections import hard_threshold

__all__ = [
    "CorruptedInstance",
    "gen_corrupted_instance",
    "amrr_run",
    "corruption_objective",
    "robust_gpgd_run",
    "estimate_ssc_sss",
]

EXHAUSTIVE_SUBSET_LIMIT = 10_000


@dataclass
class CorruptedInstance:
    """Linear regression data with k adversarially large response corruptions."""

    X: np.ndarray
    y: np.ndarray
    theta_star: np.ndarray
    b_star: np.ndarray
    k: int
    sigma: float
    seed: int

    def to_json(self) -> str:
        n, p = self.X.shape
        return json.dumps(
            {
                "n": n,
                "p": p,
                "k": self.k,
                "sigma": self.sigma,
                "seed": self.seed,
                "X": self.X.ravel().tolist(),
                "y": self.y.tolist(),
                "theta_star": self.theta_star.tolist(),
                "b_star": self.b_star.tolist(),
                "support": np.flatnonzero(self.b_star).tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "CorruptedInstance":
        d = json.loads(text)
        return cls(
            X=np.asarray(d["X"], dtype=float).reshape(d["n"], d["p"]),
            y=np.asarray(d["y"], dtype=float),
            theta_star=np.asarray(d["theta_star"], dtype=float),
            b_star=np.asarray(d["b_star"], dtype=float),
            k=int(d["k"]),
            sigma=float(d["sigma"]),
            seed=int(d["seed"]),
        )


def gen_corrupted_instance(n, p, k, sigma, magnitude, rand: RandomSource) -> CorruptedInstance:
    """Gaussian design with a uniformly placed k-sparse corruption vector.

    Corruption values are +- magnitude * (1 + |N(0,1)|), large relative to
    clean responses by construction. Recovery is impossible once half the
    points are corrupted, so k >= n/2 is rejected.
    """
    if k >= n / 2:
        raise InvalidInputError("k must be below n/2; recovery is impossible beyond")
    if k < 0 or sigma < 0:
        raise InvalidInputError("k and sigma must be non-negative")
    X = rand.split("design").normal(n, p)
    theta = rand.split("model").normal(p)
    b = np.zeros(n)
    if k > 0:
        cr = rand.split("corruption")
        support = cr.choice(n, k, replace=False)
        b[support] = cr.rademacher(k) * magnitude * (1.0 + np.abs(cr.normal(k)))
    y = X @ theta + b
    if sigma > 0:
        y = y + sigma * rand.split("noise").normal(n)
    return CorruptedInstance(X=X, y=y, theta_star=theta, b_star=b, k=k,
                             sigma=sigma, seed=rand.seed)


def _smallest_residual_set(residuals, size):
    """Indices of the ``size`` smallest squared residuals, ties by index."""
    order = np.argsort(residuals**2, kind="stable")
    return np.sort(order[:size])


@dataclass
class AmrrResult:
    theta: np.ndarray
    active_set: np.ndarray
    trace: ConvergenceTrace
    converged: bool
    ls_solves: int


def amrr_run(X, y, k, mode="fully_corrective", T=30, eta=None, switch_t=None,
             theta_star=None) -> AmrrResult:
    """Alternating robust regression.

    Starts from theta = 0 with the first n-k points as the active set, then
    alternates a model step with an active-set step that keeps the n-k
    smallest squared residuals. Modes:

    - "fully_corrective": least squares on the active set each iteration;
      stops early once the active set repeats (a fixed point).
    - "gradient": a single gradient step over the active set with step
      ``eta`` (default 1 / top-eigenvalue of the active-set Gram / |S|).
    - "hybrid": gradient steps until iteration ``switch_t``, then fully
      corrective ones.

    ``k`` is an (over-)estimate of the corruption count; declaring more
    corruptions than exist degrades gracefully (dropping clean points of a
    consistent noiseless system preserves the least-squares solution as
    long as n - k >= p).
    """
    X = check_finite(np.asarray(X, dtype=float), "X")
    y = check_finite(np.asarray(y, dtype=float), "y")
    n, p = X.shape
    if not (0 <= k < n / 2):
        raise InvalidInputError("need 0 <= k < n/2")
    if T < 1:
        raise InvalidInputError("T must be >= 1")
    if mode not in ("fully_corrective", "gradient", "hybrid"):
        raise InvalidInputError(f"unknown mode {mode!r}")
    if mode == "hybrid" and switch_t is None:
        raise InvalidInputError("hybrid mode needs switch_t")

    theta = np.zeros(p)
    active = np.arange(n - k)
    trace = ConvergenceTrace()
    t0 = time.perf_counter()
    converged = False
    ls_solves = 0

    for t in range(1, T + 1):
        corrective = mode == "fully_corrective" or (mode == "hybrid" and t >= switch_t)
        Xs, ys = X[active], y[active]
        if corrective:
            theta = solve_least_squares(Xs, ys)
            ls_solves += 1
        else:
            g = Xs.T @ (Xs @ theta - ys)
            step = eta
            if step is None:
                gram = Xs.T @ Xs / Xs.shape[0]
                step = 1.0 / float(np.linalg.eigvalsh(gram)[-1])
            theta = theta - (step / Xs.shape[0]) * g
        residuals = y - X @ theta
        new_active = _smallest_residual_set(residuals, n - k)
        obj = float(np.sum(residuals[new_active] ** 2))
        err = (np.linalg.norm(theta - theta_star) if theta_star is not None else np.nan)
        trace.record(t, obj, err, time.perf_counter() - t0)
        if corrective and np.array_equal(new_active, active):
            active = new_active
            converged = True
            break
        active = new_active
    return AmrrResult(theta=theta, active_set=active, trace=trace,
                      converged=converged, ls_solves=ls_solves)


@dataclass
class RobustGpgdResult:
    b: np.ndarray
    theta: np.ndarray
    trace: ConvergenceTrace


def corruption_objective(X, y) -> ObjectiveOracle:
    """The corruption-domain objective ||(I - P_X)(y - b)||^2 over b, where
    P_X projects onto the column space of X."""
    X = check_finite(np.asarray(X, dtype=float), "X")
    y = check_finite(np.asarray(y, dtype=float), "y")
    if np.linalg.matrix_rank(X) < X.shape[1]:
        raise InvalidInputError("design must have full column rank")
    Q, _ = np.linalg.qr(X)

    def annihilate(v):
        return v - Q @ (Q.T @ v)

    return ObjectiveOracle(
        value=lambda b: float(np.sum(annihilate(y - b) ** 2)),
        gradient=lambda b: -2.0 * annihilate(y - b),
    )


def robust_gpgd_run(X, y, k, eta=0.5, T=100, theta_star=None) -> RobustGpgdResult:
    """Corruption-domain reformulation: estimate the k-sparse corruption b by
    projected gradient descent on ||(I - P_X)(y - b)||^2, then re-fit the
    model by least squares on the cleaned responses.

    The objective's Hessian is 2(I - P_X) (eigenvalues 0 and 2), so the
    default step is 1/2.
    """
    X = check_finite(np.asarray(X, dtype=float), "X")
    y = check_finite(np.asarray(y, dtype=float), "y")
    n, p = X.shape
    if not (1 <= k < n / 2):
        raise InvalidInputError("need 1 <= k < n/2")
    f = corruption_objective(X, y)

    def model_error(b):
        th = solve_least_squares(X, y - b)
        return np.linalg.norm(th - theta_star)

    res = gpgd_run(f, lambda z: hard_threshold(z, k), np.zeros(n), eta=eta, T=T,
                   error_fn=model_error if theta_star is not None else None)
    b_hat = res.final_point
    theta_hat = solve_least_squares(X, y - b_hat)
    return RobustGpgdResult(b=b_hat, theta=theta_hat, trace=res.trace)


def estimate_ssc_sss(X, k, trials, rand: RandomSource):
    """Empirical subset strong convexity/smoothness constants.

    Returns (alpha_hat, beta_hat): the smallest observed ||X^S v||^2 over
    size-(n-k) row subsets and the largest over size-k subsets. Exhaustive
    (exact eigenvalue extremes per subset) when C(n, k) <= 10^4, sampled
    with random unit vectors otherwise. k = 0 gives beta_hat = 0.
    """
    X = check_finite(np.asarray(X, dtype=float), "X")
    n, p = X.shape
    if not (0 <= k < n):
        raise InvalidInputError("need 0 <= k < n")
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")
    if k == 0:
        gram = X.T @ X
        return float(np.linalg.eigvalsh(gram)[0]), 0.0

    if math.comb(n, k) <= EXHAUSTIVE_SUBSET_LIMIT:
        alpha = np.inf
        beta = 0.0
        for small in itertools.combinations(range(n), k):
            small = list(small)
            large = np.setdiff1d(np.arange(n), small)
            gram_small = X[small].T @ X[small]
            gram_large = X[large].T @ X[large]
            beta = max(beta, float(np.linalg.eigvalsh(gram_small)[-1]))
            alpha = min(alpha, float(np.linalg.eigvalsh(gram_large)[0]))
        return alpha, beta

    alpha = np.inf
    beta = 0.0
    for _ in range(trials):
        small = rand.choice(n, k, replace=False)
        large = rand.choice(n, n - k, replace=False)
        v = sample_unit_sphere(p, rand)
        beta = max(beta, float(np.sum((X[small] @ v) ** 2)))
        alpha = min(alpha, float(np.sum((X[large] @ v) ** 2)))
    return alpha, beta
