"""Sparse linear recovery: instance synthesis, iterative hard thresholding,
and empirical restricted-isometry estimation."""

from __future__ import annotations

import itertools
import json
import math
import time
from dataclasses import dataclass

import numpy as np

from .core import ConvergenceTrace, RandomSource, check_finite, sample_unit_sphere
from .exceptions import DivergedError, InvalidInputError
from .projections import hard_threshold

__all__ = [
    "SparseInstance",
    "IsometryEstimate",
    "gen_sparse_instance",
    "iht_run",
    "estimate_restricted_isometry",
    "EXHAUSTIVE_SUPPORT_LIMIT",
]

DESIGNS = ("gaussian", "rademacher", "sparse_ternary")
EXHAUSTIVE_SUPPORT_LIMIT = 10_000
RESIDUAL_STOP = 1e-10


@dataclass
class SparseInstance:
    """A sparse regression problem y = X theta* + noise."""

    X: np.ndarray
    y: np.ndarray
    theta_star: np.ndarray
    s: int
    sigma: float
    design: str
    seed: int

    def to_json(self) -> str:
        n, p = self.X.shape
        return json.dumps(
            {
                "n": n,
                "p": p,
                "s": self.s,
                "sigma": self.sigma,
                "seed": self.seed,
                "design": self.design,
                "X": self.X.ravel().tolist(),  # row-major
                "y": self.y.tolist(),
                "theta_star": self.theta_star.tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "SparseInstance":
        d = json.loads(text)
        X = np.asarray(d["X"], dtype=float).reshape(d["n"], d["p"])
        return cls(
            X=X,
            y=np.asarray(d["y"], dtype=float),
            theta_star=np.asarray(d["theta_star"], dtype=float),
            s=int(d["s"]),
            sigma=float(d["sigma"]),
            design=d["design"],
            seed=int(d["seed"]),
        )


@dataclass
class IsometryEstimate:
    """Empirical restricted-isometry bracket at a given sparsity order.

    ``lower``/``upper`` are the observed extremes of ||X v||^2 / n over unit
    vectors of the sampled (or exhaustively enumerated) supports. This is a
    randomized certificate, not a proof of the true RIP constant.
    """

    order: int
    lower: float
    upper: float
    trials: int
    exhaustive: bool

    @property
    def delta(self) -> float:
        """RIP-style distortion max(upper - 1, 1 - lower)."""
        return max(self.upper - 1.0, 1.0 - self.lower)


def gen_sparse_instance(n, p, s, sigma, design, rand: RandomSource) -> SparseInstance:
    """Draw a design matrix, an s-sparse model and (noisy) responses.

    Designs (scaled so that X^T X / n ~ I, the convention every solver here
    uses): "gaussian" (entries N(0, 1)), "rademacher" (+-1), "sparse_ternary"
    (0 w.p. 2/3, +-sqrt(3) w.p. 1/6 each). Column norms concentrate around
    sqrt(n).
    """
    if n < 1 or p < 1 or not (1 <= s <= p):
        raise InvalidInputError("need n >= 1 and 1 <= s <= p")
    if sigma < 0:
        raise InvalidInputError("sigma must be non-negative")
    design = design.lower()
    if design not in DESIGNS:
        raise InvalidInputError(f"unknown design {design!r}; options: {DESIGNS}")

    dr = rand.split("design")
    if design == "gaussian":
        X = dr.normal(n, p)
    elif design == "rademacher":
        X = dr.rademacher(n, p)
    else:
        mask = dr.uniform(size=(n, p))
        signs = dr.rademacher(n, p)
        X = np.where(mask < 1.0 / 3.0, signs * math.sqrt(3.0), 0.0)

    mr = rand.split("model")
    support = np.sort(mr.choice(p, s, replace=False))
    theta = np.zeros(p)
    theta[support] = mr.normal(s)

    y = X @ theta
    if sigma > 0:
        y = y + sigma * rand.split("noise").normal(n)
    return SparseInstance(X=X, y=y, theta_star=theta, s=s, sigma=sigma,
                          design=design, seed=rand.seed)


@dataclass
class IhtResult:
    theta: np.ndarray
    trace: ConvergenceTrace
    converged: bool


def iht_run(X, y, k, eta=1.0, T=500, theta_star=None) -> IhtResult:
    """Iterative hard thresholding on f(theta) = ||X theta - y||^2 / n.

    Updates z = theta - (eta/n) X^T (X theta - y) followed by the s-sparse
    projection, starting from zero. Stops at T iterations or when the
    relative residual drops below 1e-10, whichever comes first.
    """
    X = check_finite(np.asarray(X, dtype=float), "X")
    y = check_finite(np.asarray(y, dtype=float), "y")
    n, p = X.shape
    if not (1 <= k <= p):
        raise InvalidInputError("projection sparsity out of range")
    if eta <= 0:
        raise InvalidInputError("eta must be positive")
    theta = np.zeros(p)
    trace = ConvergenceTrace()
    y_norm = np.linalg.norm(y)
    t0 = time.perf_counter()
    converged = False
    for t in range(1, T + 1):
        residual = X @ theta - y
        z = theta - (eta / n) * (X.T @ residual)
        theta = hard_threshold(z, k)
        if not np.all(np.isfinite(theta)):
            raise DivergedError("IHT iterate became non-finite", last_iterate=None,
                                trace=trace)
        obj = float(np.sum((X @ theta - y) ** 2) / n)
        if obj > 1e12:
            raise DivergedError("IHT objective exploded", last_iterate=theta, trace=trace)
        err = (np.linalg.norm(theta - theta_star) if theta_star is not None else np.nan)
        trace.record(t, obj, err, time.perf_counter() - t0)
        if y_norm == 0 or math.sqrt(obj * n) <= RESIDUAL_STOP * y_norm:
            converged = True
            break
    return IhtResult(theta=theta, trace=trace, converged=converged)


def estimate_restricted_isometry(X, k, trials, rand: RandomSource) -> IsometryEstimate:
    """Bracket the restricted eigenvalues of X^T X / n at sparsity order k.

    When the number of supports C(p, k) is at most 10^4 every support is
    enumerated and the exact per-support eigenvalue extremes are used;
    otherwise ``trials`` random (support, unit vector) pairs are sampled.
    """
    X = check_finite(np.asarray(X, dtype=float), "X")
    n, p = X.shape
    if not (1 <= k <= p):
        raise InvalidInputError("order k out of range")
    if trials < 1:
        raise InvalidInputError("trials must be >= 1")

    if math.comb(p, k) <= EXHAUSTIVE_SUPPORT_LIMIT:
        lower, upper = np.inf, -np.inf
        count = 0
        for supp in itertools.combinations(range(p), k):
            sub = X[:, list(supp)]
            evals = np.linalg.eigvalsh(sub.T @ sub / n)
            lower = min(lower, float(evals[0]))
            upper = max(upper, float(evals[-1]))
            count += 1
        return IsometryEstimate(order=k, lower=lower, upper=upper,
                                trials=count, exhaustive=True)

    lower, upper = np.inf, -np.inf
    for _ in range(trials):
        supp = rand.choice(p, k, replace=False)
        v = sample_unit_sphere(k, rand)
        val = float(np.sum((X[:, supp] @ v) ** 2) / n)
        lower = min(lower, val)
        upper = max(upper, val)
    return IsometryEstimate(order=k, lower=lower, upper=upper,
                            trials=trials, exhaustive=False)
