"""EM and hard-assignment alternation for two-component latent variable models.

Covers the balanced isotropic Gaussian mixture and balanced mixed regression:
posterior (E) steps computed in log space, closed-form (M) steps, plus generic
``em_run`` / ``amlvm_run`` drivers that work with any (E, M) pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import check_finite
from .exceptions import DegenerateComponentError, InvalidInputError
from .linalg import solve_least_squares

__all__ = [
    "GmmState",
    "MixRegState",
    "LatentWeights",
    "gmm_posterior_weights",
    "gmm_update_means",
    "gmm_log_likelihood",
    "mixreg_posterior_weights",
    "mixreg_update_models",
    "mixreg_log_likelihood",
    "em_run",
    "amlvm_run",
    "EmResult",
    "make_gmm_steps",
    "make_gmm_hard_steps",
    "make_mixreg_steps",
]


@dataclass
class GmmState:
    """Component means of a balanced isotropic two-Gaussian mixture."""

    mu0: np.ndarray
    mu1: np.ndarray

    def __post_init__(self):
        self.mu0 = check_finite(np.asarray(self.mu0, dtype=float), "mu0")
        self.mu1 = check_finite(np.asarray(self.mu1, dtype=float), "mu1")


@dataclass
class MixRegState:
    """The two regressors of a balanced mixed-regression model."""

    theta0: np.ndarray
    theta1: np.ndarray

    def __post_init__(self):
        self.theta0 = check_finite(np.asarray(self.theta0, dtype=float), "theta0")
        self.theta1 = check_finite(np.asarray(self.theta1, dtype=float), "theta1")


@dataclass
class LatentWeights:
    """Per-sample posterior (or hard) weights over the two components.

    w0 + w1 = 1 elementwise; both non-negative.
    """

    w0: np.ndarray
    w1: np.ndarray

    def __post_init__(self):
        self.w0 = np.atleast_1d(np.asarray(self.w0, dtype=float))
        self.w1 = np.atleast_1d(np.asarray(self.w1, dtype=float))
        if self.w0.shape != self.w1.shape:
            raise InvalidInputError("weight arrays must have equal shapes")
        if np.any(self.w0 < -1e-12) or np.any(self.w1 < -1e-12):
            raise InvalidInputError("weights must be non-negative")
        if np.max(np.abs(self.w0 + self.w1 - 1.0)) > 1e-12:
            raise InvalidInputError("weights must sum to one per sample")


def _normalize_two_logits(l0, l1):
    """Stable softmax over two log-affinities via the log-sum-exp shift."""
    m = np.maximum(l0, l1)
    e0 = np.exp(l0 - m)
    e1 = np.exp(l1 - m)
    z = e0 + e1
    return e0 / z, e1 / z


def _as_points(Y):
    Y = check_finite(np.asarray(Y, dtype=float), "points")
    return Y.reshape(1, -1) if Y.ndim == 1 else Y


# -- Gaussian mixtures -------------------------------------------------------


def gmm_posterior_weights(state: GmmState, y) -> LatentWeights:
    """Posterior component affinities w_z ~ exp(-||y - mu_z||^2 / 2).

    Accepts a single point or an (n, p) batch; computed in log space so
    extreme separations stay normalized.
    """
    Y = _as_points(y)
    d0 = -0.5 * np.sum((Y - state.mu0) ** 2, axis=1)
    d1 = -0.5 * np.sum((Y - state.mu1) ** 2, axis=1)
    w0, w1 = _normalize_two_logits(d0, d1)
    return LatentWeights(w0, w1)


def gmm_update_means(points, weights: LatentWeights) -> GmmState:
    """Weighted-mean update of the component means.

    Each mean is the responsibility-weighted average of the points, i.e. the
    maximizer of the mixture's surrogate objective (the raw weighted sum is
    normalized by the total component mass).
    """
    Y = _as_points(points)
    if Y.shape[0] != weights.w0.shape[0]:
        raise InvalidInputError("points and weights disagree in length")
    m0 = weights.w0.sum()
    m1 = weights.w1.sum()
    if m0 <= 1e-300:
        raise DegenerateComponentError("component 0 received zero weight mass")
    if m1 <= 1e-300:
        raise DegenerateComponentError("component 1 received zero weight mass")
    return GmmState(mu0=weights.w0 @ Y / m0, mu1=weights.w1 @ Y / m1)


def gmm_log_likelihood(state: GmmState, points) -> float:
    """Sample log-likelihood sum_i log(e^{-||y-mu0||^2/2} + e^{-||y-mu1||^2/2}).

    Constant factors of the mixture density are dropped; monotonicity
    comparisons are unaffected.
    """
    Y = _as_points(points)
    d0 = -0.5 * np.sum((Y - state.mu0) ** 2, axis=1)
    d1 = -0.5 * np.sum((Y - state.mu1) ** 2, axis=1)
    return float(np.sum(np.logaddexp(d0, d1)))


# -- mixed regression --------------------------------------------------------


def mixreg_posterior_weights(state: MixRegState, x, y) -> LatentWeights:
    """Model affinities alpha_z ~ exp(-(y - x^T theta_z)^2 / 2), normalized
    in log space. Accepts a single (x, y) pair or a batch (X, y)."""
    X = _as_points(x)
    yv = np.atleast_1d(np.asarray(y, dtype=float))
    r0 = -0.5 * (yv - X @ state.theta0) ** 2
    r1 = -0.5 * (yv - X @ state.theta1) ** 2
    a0, a1 = _normalize_two_logits(r0, r1)
    return LatentWeights(a0, a1)


def mixreg_update_models(X, y, weights: LatentWeights,
                         diagnostics: Optional[dict] = None) -> MixRegState:
    """Two weighted least-squares solves, one per component.

    A singular weighted Gram matrix falls back to the stabilized
    minimum-norm solution; ``diagnostics["fallback"]`` records which
    components needed it.
    """
    X = _as_points(X)
    yv = np.atleast_1d(np.asarray(y, dtype=float))
    fallbacks = []
    thetas = []
    for z, w in ((0, weights.w0), (1, weights.w1)):
        sw = np.sqrt(w)
        diag = {}
        theta = solve_least_squares(X * sw[:, None], yv * sw, diagnostics=diag)
        if diag["stabilized"]:
            fallbacks.append(z)
        thetas.append(theta)
    if diagnostics is not None:
        diagnostics["fallback"] = fallbacks
    return MixRegState(theta0=thetas[0], theta1=thetas[1])


def mixreg_log_likelihood(state: MixRegState, X, y) -> float:
    X = _as_points(X)
    yv = np.atleast_1d(np.asarray(y, dtype=float))
    r0 = -0.5 * (yv - X @ state.theta0) ** 2
    r1 = -0.5 * (yv - X @ state.theta1) ** 2
    return float(np.sum(np.logaddexp(r0, r1)))


# -- drivers -----------------------------------------------------------------


@dataclass
class EmResult:
    states: list
    log_likelihoods: list

    @property
    def final(self):
        return self.states[-1]


def em_run(e_step, m_step, init, T, log_likelihood=None) -> EmResult:
    """Alternate E and M steps from ``init`` for T iterations.

    ``e_step(state) -> weights``; ``m_step(weights, state) -> state`` (the
    previous state is passed through for carry-forward variants);
    ``log_likelihood(state)`` is recorded per iteration when given.
    """
    if T < 1:
        raise InvalidInputError("T must be >= 1")
    state = init
    states = [state]
    lls = [float(log_likelihood(state))] if log_likelihood else []
    for _ in range(T):
        weights = e_step(state)
        state = m_step(weights, state)
        states.append(state)
        if log_likelihood:
            lls.append(float(log_likelihood(state)))
    return EmResult(states=states, log_likelihoods=lls)


def amlvm_run(hard_e_step, m_step, init, T, joint_objective=None) -> EmResult:
    """Hard-assignment alternation: the E step commits each sample to its
    argmax component. Same driver shape as :func:`em_run`."""
    return em_run(hard_e_step, m_step, init, T, log_likelihood=joint_objective)


# -- problem-specific step factories ----------------------------------------


def make_gmm_steps(points):
    """(e_step, m_step, log_likelihood) for EM on a two-Gaussian mixture."""
    Y = _as_points(points)

    def e_step(state):
        return gmm_posterior_weights(state, Y)

    def m_step(weights, state):
        return gmm_update_means(Y, weights)

    return e_step, m_step, lambda s: gmm_log_likelihood(s, Y)


def make_gmm_hard_steps(points, diagnostics: Optional[dict] = None):
    """(hard_e_step, m_step, joint_objective) for AM-LVM on the mixture.

    The hard E step assigns each point to the nearer mean (component 0 on
    ties). An empty component keeps its previous mean; the event is flagged.
    The joint objective is the complete-data log-likelihood at the hard
    assignments.
    """
    Y = _as_points(points)

    def hard_e_step(state):
        soft = gmm_posterior_weights(state, Y)
        hard0 = (soft.w0 >= 0.5).astype(float)
        return LatentWeights(hard0, 1.0 - hard0)

    def m_step(weights, state):
        m0, m1 = weights.w0.sum(), weights.w1.sum()
        mu0 = weights.w0 @ Y / m0 if m0 > 0 else state.mu0
        mu1 = weights.w1 @ Y / m1 if m1 > 0 else state.mu1
        if diagnostics is not None and (m0 == 0 or m1 == 0):
            diagnostics.setdefault("untouched", []).append(0 if m0 == 0 else 1)
        return GmmState(mu0, mu1)

    def joint_objective(state):
        w = hard_e_step(state)
        d0 = -0.5 * np.sum((Y - state.mu0) ** 2, axis=1)
        d1 = -0.5 * np.sum((Y - state.mu1) ** 2, axis=1)
        return float(np.sum(w.w0 * d0 + w.w1 * d1))

    return hard_e_step, m_step, joint_objective


def make_mixreg_steps(X, y):
    """(e_step, m_step, log_likelihood) for EM on balanced mixed regression."""
    Xm = _as_points(X)
    yv = np.atleast_1d(np.asarray(y, dtype=float))

    def e_step(state):
        return mixreg_posterior_weights(state, Xm, yv)

    def m_step(weights, state):
        return mixreg_update_models(Xm, yv, weights)

    return e_step, m_step, lambda s: mixreg_log_likelihood(s, Xm, yv)
