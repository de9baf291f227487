"""Low-rank matrix recovery: SVP for affine measurements and alternating
least squares for matrix completion, plus incoherence diagnostics."""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .core import ConvergenceTrace, RandomSource, check_finite
from .exceptions import DivergedError, GenerationError, InvalidInputError
from .linalg import solve_least_squares, truncated_svd
from .projections import project_low_rank

__all__ = [
    "AffineMap",
    "CompletionInstance",
    "IncoherenceReport",
    "gen_arm_instance",
    "svp_run",
    "estimate_matrix_rip",
    "incoherence_of",
    "gen_completion_instance",
    "ammc_run",
]


class AffineMap:
    """A linear map R^{m x n} -> R^k given by dense measurement matrices A_i,
    with ``apply(X)_i = <A_i, X>`` and the true adjoint
    ``adjoint(v) = sum_i v_i A_i``."""

    def __init__(self, matrices):
        A = check_finite(np.asarray(matrices, dtype=float), "measurement matrices")
        if A.ndim != 3:
            raise InvalidInputError("expected a k x m x n array of matrices")
        self.tensor = A
        self.k, self.m, self.n = A.shape

    def apply(self, X):
        return np.tensordot(self.tensor, X, axes=([1, 2], [0, 1]))

    def adjoint(self, v):
        return np.tensordot(v, self.tensor, axes=(0, 0))


@dataclass
class IncoherenceReport:
    """Row-norm flatness of the rank-r singular factors of a matrix."""

    mu: float
    rank: int
    max_left_row_norm: float
    max_right_row_norm: float


@dataclass
class CompletionInstance:
    """A low-rank matrix observed on a Bernoulli-sampled index set."""

    A_star: np.ndarray
    omega: np.ndarray  # (num_observed, 2) int array of (i, j) indices
    p_sample: float
    rank: int
    seed: int

    @property
    def shape(self):
        return self.A_star.shape

    def observed_values(self):
        return self.A_star[self.omega[:, 0], self.omega[:, 1]]

    def mask(self):
        m, n = self.A_star.shape
        Z = np.zeros((m, n), dtype=bool)
        Z[self.omega[:, 0], self.omega[:, 1]] = True
        return Z

    def to_json(self) -> str:
        m, n = self.A_star.shape
        U, s, V = truncated_svd(self.A_star, self.rank)
        return json.dumps(
            {
                "m": m,
                "n": n,
                "r": self.rank,
                "p_sample": self.p_sample,
                "seed": self.seed,
                "omega": self.omega.tolist(),
                "values": self.observed_values().tolist(),
                "factors": {
                    "left": (U * s).ravel().tolist(),
                    "right": V.ravel().tolist(),
                },
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "CompletionInstance":
        d = json.loads(text)
        m, n, r = int(d["m"]), int(d["n"]), int(d["r"])
        left = np.asarray(d["factors"]["left"], dtype=float).reshape(m, r)
        right = np.asarray(d["factors"]["right"], dtype=float).reshape(n, r)
        return cls(
            A_star=left @ right.T,
            omega=np.asarray(d["omega"], dtype=int),
            p_sample=float(d["p_sample"]),
            rank=r,
            seed=int(d["seed"]),
        )


def gen_arm_instance(m, n, r, k, rand: RandomSource):
    """Random affine-rank-minimization instance.

    Measurement matrices have i.i.d. N(0, 1/k) entries; the target is a
    product of Gaussian factors. Returns (map, y, X_star).
    """
    if not (1 <= r <= min(m, n)) or k < 1:
        raise InvalidInputError("invalid sizes for ARM instance")
    A = rand.split("map").normal(k, m, n) / math.sqrt(k)
    fr = rand.split("factors")
    X_star = fr.normal(m, r) @ fr.normal(r, n)
    amap = AffineMap(A)
    return amap, amap.apply(X_star), X_star


def estimate_matrix_rip(amap: AffineMap, r, probes=20, rand: RandomSource | None = None):
    """Estimate the rank-r restricted distortion of an affine map from random
    unit-Frobenius rank-r probes. Returns max |, ||A(X)||^2 - 1 ,| observed."""
    if rand is None:
        rand = RandomSource(0)
    delta = 0.0
    for _ in range(probes):
        X = rand.normal(amap.m, r) @ rand.normal(r, amap.n)
        X /= np.linalg.norm(X)
        delta = max(delta, abs(float(np.sum(amap.apply(X) ** 2)) - 1.0))
    return delta


def _restricted_top_eigenvalue(amap: AffineMap, r, rand, iters=15):
    """Top eigenvalue of X -> Pi_r(A^T(A(X))) by projected power iteration.

    Random probes alone underestimate the restricted spectrum badly at small
    measurement counts; the power iteration hunts the stiff directions the
    SVP update actually sees."""
    X = rand.normal(amap.m, r) @ rand.normal(r, amap.n)
    X /= np.linalg.norm(X)
    lam = 1.0
    for _ in range(iters):
        Y = project_low_rank(amap.adjoint(amap.apply(X)), r, rand)
        lam = np.linalg.norm(Y)
        if lam == 0:
            return 0.0
        X = Y / lam
    return float(lam)


@dataclass
class SvpResult:
    X: np.ndarray
    trace: ConvergenceTrace
    converged: bool
    eta: float


def svp_run(amap: AffineMap, y, q, eta=None, T=300, X_star=None,
            rand: RandomSource | None = None, callback=None) -> SvpResult:
    """Singular value projection for affine rank minimization.

    Y = X - eta * adjoint(apply(X) - y) followed by the rank-q truncation,
    from the zero matrix. With ``eta=None`` the step defaults to
    1 / (1 + delta_hat) where delta_hat is the larger of a probe-based
    rank-2q distortion estimate and the projected-power-iteration estimate
    of the top restricted eigenvalue minus one; pass ``eta="fallback"`` to
    skip estimation and use 0.75.
    """
    y = check_finite(np.asarray(y, dtype=float), "y")
    if q < 1:
        raise InvalidInputError("target rank must be >= 1")
    if eta is None:
        est_rand = rand if rand is not None else RandomSource(0)
        delta = max(
            estimate_matrix_rip(amap, 2 * q, rand=est_rand.split("probes")),
            _restricted_top_eigenvalue(amap, 2 * q, est_rand.split("power")) - 1.0,
        )
        eta = 1.0 / (1.0 + delta)
    elif eta == "fallback":
        eta = 0.75
    elif eta <= 0:
        raise InvalidInputError("eta must be positive")

    X = np.zeros((amap.m, amap.n))
    trace = ConvergenceTrace()
    t0 = time.perf_counter()
    y_norm = np.linalg.norm(y)
    converged = False
    for t in range(1, T + 1):
        residual = amap.apply(X) - y
        Ynext = X - eta * amap.adjoint(residual)
        X = project_low_rank(Ynext, q, rand)
        obj = float(np.sum((amap.apply(X) - y) ** 2))
        if not np.isfinite(obj) or obj > 1e12:
            raise DivergedError("SVP objective exploded", last_iterate=X, trace=trace)
        err = (np.linalg.norm(X - X_star) / max(np.linalg.norm(X_star), 1e-300)
               if X_star is not None else np.nan)
        trace.record(t, obj, err, time.perf_counter() - t0)
        if callback is not None:
            callback(t, X)
        if y_norm == 0 or math.sqrt(obj) <= 1e-10 * y_norm:
            converged = True
            break
    return SvpResult(X=X, trace=trace, converged=converged, eta=eta)


def incoherence_of(A, r, rand: RandomSource | None = None) -> IncoherenceReport:
    """Incoherence mu of the rank-r singular factors: the largest scaled row
    norm max(||U^i|| sqrt(m), ||V^j|| sqrt(n)) / sqrt(r)."""
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    U, s, V = truncated_svd(A, r, rand)
    left = float(np.max(np.linalg.norm(U, axis=1)))
    right = float(np.max(np.linalg.norm(V, axis=1)))
    mu = max(left * math.sqrt(m), right * math.sqrt(n)) / math.sqrt(r)
    return IncoherenceReport(mu=mu, rank=r, max_left_row_norm=left,
                             max_right_row_norm=right)


def gen_completion_instance(m, n, r, p_sample, mu_cap, rand: RandomSource,
                            max_attempts=50) -> CompletionInstance:
    """Gaussian-factor low-rank matrix plus a Bernoulli(p_sample) index set.

    Factors are redrawn (up to 50 times) until the incoherence cap is met.
    """
    if not (0 < p_sample <= 1):
        raise InvalidInputError("p_sample must lie in (0, 1]")
    if not (1 <= r <= min(m, n)):
        raise InvalidInputError("rank out of range")
    fr = rand.split("factors")
    A_star = None
    for _ in range(max_attempts):
        cand = fr.normal(m, r) @ fr.normal(r, n)
        if incoherence_of(cand, r).mu <= mu_cap:
            A_star = cand
            break
    if A_star is None:
        raise GenerationError(
            f"could not draw factors with incoherence <= {mu_cap} in {max_attempts} tries"
        )
    mask = rand.split("omega").uniform(size=(m, n)) < p_sample
    idx = np.argwhere(mask)
    return CompletionInstance(A_star=A_star, omega=idx, p_sample=p_sample,
                              rank=r, seed=rand.seed)


@dataclass
class AmmcResult:
    U: np.ndarray
    V: np.ndarray
    trace: ConvergenceTrace
    flags: dict = field(default_factory=dict)

    def product(self):
        return self.U @ self.V.T


def ammc_run(inst: CompletionInstance, r, T=25, fresh_splits=True,
             rand: RandomSource | None = None, callback=None) -> AmmcResult:
    """Alternating least squares for matrix completion.

    With ``fresh_splits=True`` (the analyzed form) the observed index set is
    partitioned uniformly into 2T+1 disjoint groups: the first initializes
    U via the top-r left singular vectors of the rescaled zero-filled matrix,
    and each alternation consumes one fresh group per half-step. With
    ``fresh_splits=False`` every step reuses the full index set (the
    practitioners' variant), with the first group convention replaced by the
    whole of omega.

    Flags: "thin_splits" when a split carries fewer than 10 entries,
    "carried_rows" counting least-squares rows skipped for lack of data.
    """
    if rand is None:
        rand = RandomSource(inst.seed).split("ammc")
    m, n = inst.shape
    if not (1 <= r <= min(m, n)):
        raise InvalidInputError("rank out of range")
    omega = inst.omega
    values = inst.observed_values()
    num = omega.shape[0]
    flags = {"thin_splits": False, "carried_rows": 0}

    if fresh_splits:
        if num < 2 * T + 1:
            raise InvalidInputError("need at least 2T+1 observed entries")
        perm = rand.permutation(num)
        groups = np.array_split(perm, 2 * T + 1)
        if min(len(g) for g in groups) < 10:
            flags["thin_splits"] = True
    else:
        groups = None

    def group_indices(g):
        if groups is None:
            return omega, values
        sel = groups[g]
        return omega[sel], values[sel]

    # spectral initialization on the first group
    om0, val0 = group_indices(0)
    Z = np.zeros((m, n))
    Z[om0[:, 0], om0[:, 1]] = val0
    p_eff = inst.p_sample / (2 * T + 1) if fresh_splits else inst.p_sample
    U, _, _ = truncated_svd(Z / p_eff, r, rand)

    V = np.zeros((n, r))
    trace = ConvergenceTrace()
    t0 = time.perf_counter()
    a_norm = np.linalg.norm(inst.A_star)

    for t in range(1, T + 1):
        om_v, val_v = group_indices(t if fresh_splits else 0)
        V = _solve_completion_block(om_v, val_v, U, n, V, flags, transpose=False)
        om_u, val_u = group_indices(T + t if fresh_splits else 0)
        U = _solve_completion_block(om_u, val_u, V, m, U, flags, transpose=True)
        product = U @ V.T
        fit = product[omega[:, 0], omega[:, 1]] - values
        obj = float(fit @ fit)  # residual on the observed entries
        if not np.isfinite(obj) or obj > 1e12:
            raise DivergedError("AM-MC iterates exploded", last_iterate=(U, V),
                                trace=trace)
        err = float(np.linalg.norm(product - inst.A_star)) / max(a_norm, 1e-300)
        trace.record(t, obj, err, time.perf_counter() - t0)
        if callback is not None:
            callback(t, U, V)
    return AmmcResult(U=U, V=V, trace=trace, flags=flags)


def _solve_completion_block(omega, values, fixed, rows, prev, flags, transpose):
    """One half-step of AM-MC: least squares for each row of the free factor.

    ``transpose=False`` solves for V (columns of the matrix, using fixed U);
    ``transpose=True`` solves for U (rows, using fixed V).
    """
    out = prev.copy()
    axis_obs = omega[:, 1] if not transpose else omega[:, 0]
    other_obs = omega[:, 0] if not transpose else omega[:, 1]
    order = np.argsort(axis_obs, kind="stable")
    axis_sorted = axis_obs[order]
    bounds = np.searchsorted(axis_sorted, np.arange(rows + 1))
    for j in range(rows):
        lo, hi = bounds[j], bounds[j + 1]
        if lo == hi:
            flags["carried_rows"] += 1
            continue
        sel = order[lo:hi]
        F = fixed[other_obs[sel]]
        out[j] = solve_least_squares(F, values[sel])
    return out
