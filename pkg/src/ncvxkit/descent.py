"""First-order descent engines: PGD, gPGD, NGD and PNGD.

The engines share one inner loop parameterized by a step policy, an optional
projection, and an optional gradient perturbation. Three candidate outputs
are always populated: the final iterate, the average of the first T iterates,
and the best iterate seen.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import ConvergenceTrace, RandomSource, sample_unit_sphere
from .exceptions import DivergedError, InvalidInputError

__all__ = [
    "ObjectiveOracle",
    "ConstantStep",
    "HorizonAwareStep",
    "HorizonObliviousStep",
    "InverseSmoothnessStep",
    "DescentResult",
    "pgd_run",
    "gpgd_run",
    "ngd_run",
    "pngd_run",
    "ngd_schedule",
    "finite_difference_gradient",
    "check_gradient",
]

OBJECTIVE_CAP = 1e12


@dataclass
class ObjectiveOracle:
    """Callable bundle for a differentiable objective.

    ``value(x) -> float``, ``gradient(x) -> array``; ``hessian_vector(x, d)``
    is optional and only used by diagnostics.
    """

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian_vector: Optional[Callable[[np.ndarray, np.ndarray], np.ndarray]] = None


# -- step policies ---------------------------------------------------------


@dataclass(frozen=True)
class ConstantStep:
    eta: float

    def step(self, t, T):
        return self.eta


@dataclass(frozen=True)
class HorizonAwareStep:
    """eta_t = 1 / sqrt(T): the horizon-aware constant step."""

    def step(self, t, T):
        return 1.0 / math.sqrt(T)


@dataclass(frozen=True)
class HorizonObliviousStep:
    """eta_t = 1 / sqrt(t), for use when the horizon is unknown."""

    def step(self, t, T):
        return 1.0 / math.sqrt(t)


@dataclass(frozen=True)
class InverseSmoothnessStep:
    """eta = 1 / beta for beta-strongly-smooth objectives."""

    beta: float

    def step(self, t, T):
        return 1.0 / self.beta


@dataclass
class DescentResult:
    """Outputs of a descent run.

    ``final_point`` is the iterate after the last update, ``averaged_point``
    the mean of the first T iterates (including the start, excluding the last
    update), and ``best_point`` the recorded iterate of least objective value.
    """

    final_point: np.ndarray
    averaged_point: np.ndarray
    best_point: np.ndarray
    trace: ConvergenceTrace
    diagnostics: dict


def _validate_step(eta):
    if not (eta > 0):
        raise InvalidInputError(f"step length must be positive, got {eta}")


def _descent_loop(f, x0, T, step_fn, projector=None, noise_fn=None,
                  error_fn=None, stall_tol=0.0):
    """Shared engine: x <- Pi(x - eta_t * (grad f(x) + noise))."""
    x = np.array(x0, dtype=float, copy=True)
    trace = ConvergenceTrace()
    diagnostics = {"stalled_at": None}
    t0 = time.perf_counter()

    running_sum = np.zeros_like(x)
    best = x.copy()
    best_val = float(f.value(x))
    count = 0

    for t in range(1, T + 1):
        running_sum += x
        count += 1
        g = np.asarray(f.gradient(x), dtype=float)
        if not np.all(np.isfinite(g)):
            raise DivergedError("non-finite gradient", last_iterate=x, trace=trace)
        if noise_fn is not None:
            g = g + noise_fn()
        eta = step_fn(t, T)
        _validate_step(eta)
        z = x - eta * g
        x_next = projector(z) if projector is not None else z
        if not np.all(np.isfinite(x_next)):
            raise DivergedError("non-finite iterate", last_iterate=x, trace=trace)
        val = float(f.value(x_next))
        if val > OBJECTIVE_CAP or not np.isfinite(val):
            raise DivergedError(
                f"objective exploded ({val!r})", last_iterate=x, trace=trace
            )
        err = float(error_fn(x_next)) if error_fn is not None else np.nan
        trace.record(t, val, err, time.perf_counter() - t0)
        if val < best_val:
            best_val = val
            best = x_next.copy()
        moved = np.linalg.norm(x_next - x)
        x = x_next
        if stall_tol > 0 and moved <= stall_tol:
            diagnostics["stalled_at"] = t
            break

    return DescentResult(
        final_point=x,
        averaged_point=running_sum / count,
        best_point=best,
        trace=trace,
        diagnostics=diagnostics,
    )


def pgd_run(f: ObjectiveOracle, projector, x0, steps, T, error_fn=None,
            stall_tol=0.0) -> DescentResult:
    """Projected gradient descent with a convex projection.

    Iterates z = x - eta_t * grad f(x), x <- Pi(z) for T steps. ``steps`` is
    one of the step policies in this module (or anything with a
    ``step(t, T)`` method).
    """
    if T < 1:
        raise InvalidInputError("T must be >= 1")
    return _descent_loop(f, x0, T, steps.step, projector=projector,
                         error_fn=error_fn, stall_tol=stall_tol)


def gpgd_run(f: ObjectiveOracle, nonconvex_projector, x0, eta, T,
             error_fn=None, stall_tol=0.0) -> DescentResult:
    """Generalized PGD: identical update with a (possibly non-convex)
    projection and a constant step length. The final iterate is the primary
    output."""
    if T < 1:
        raise InvalidInputError("T must be >= 1")
    _validate_step(eta)
    return _descent_loop(f, x0, T, ConstantStep(eta).step,
                         projector=nonconvex_projector,
                         error_fn=error_fn, stall_tol=stall_tol)


def ngd_schedule(eta_max, epsilon):
    """The (eta, T) pair used by noisy gradient descent:
    eta = min(eps^2 / log^2(1/eps), eta_max) and T = ceil(1/eta^2)."""
    if not (0 < epsilon < 1):
        raise InvalidInputError("epsilon must lie in (0, 1)")
    _validate_step(eta_max)
    eta = min(epsilon**2 / math.log(1.0 / epsilon) ** 2, eta_max)
    T = math.ceil(1.0 / eta**2)
    return eta, T


def ngd_run(f: ObjectiveOracle, x0, eta_max, epsilon, rand: RandomSource,
            error_fn=None, stochastic_gradient=None) -> DescentResult:
    """Noisy gradient descent for saddle escape.

    Each step perturbs the gradient with a uniform draw from the unit sphere:
    x <- x - eta * (grad f(x) + zeta). The step length and budget come from
    :func:`ngd_schedule`. ``stochastic_gradient(x, rand)``, when given,
    replaces the full gradient (the sampled finite-sum variant); the sphere
    perturbation is applied either way.
    """
    eta, T = ngd_schedule(eta_max, epsilon)
    x0 = np.asarray(x0, dtype=float)
    dim = x0.shape[0]
    noise = lambda: sample_unit_sphere(dim, rand)
    if stochastic_gradient is not None:
        f = ObjectiveOracle(value=f.value,
                            gradient=lambda x: stochastic_gradient(x, rand))
    return _descent_loop(f, x0, T, ConstantStep(eta).step, projector=None,
                         noise_fn=noise, error_fn=error_fn)


def pngd_run(f: ObjectiveOracle, manifold_projector, x0, eta_max, epsilon,
             rand: RandomSource, error_fn=None) -> DescentResult:
    """Projected NGD: noisy gradient step followed by a manifold projection.

    ``x0`` must already lie on the constraint manifold.
    """
    eta, T = ngd_schedule(eta_max, epsilon)
    x0 = np.asarray(x0, dtype=float)
    back = manifold_projector(x0)
    if np.linalg.norm(back - x0) > 1e-8 * (1.0 + np.linalg.norm(x0)):
        raise InvalidInputError("x0 is not on the constraint manifold")
    dim = x0.shape[0]
    noise = lambda: sample_unit_sphere(dim, rand)
    return _descent_loop(f, x0, T, ConstantStep(eta).step,
                         projector=manifold_projector, noise_fn=noise,
                         error_fn=error_fn)


# -- gradient diagnostics ---------------------------------------------------


def finite_difference_gradient(value_fn, x, h=1e-5):
    """Central-difference gradient of a scalar function of a real vector."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (value_fn(x + e) - value_fn(x - e)) / (2 * h)
    return g


def check_gradient(f: ObjectiveOracle, points, rel_tol=1e-4, h=1e-5):
    """Verify f.gradient against central differences at the given points.

    Returns the worst relative error; raises InvalidInputError when it
    exceeds ``rel_tol``.
    """
    worst = 0.0
    for x in points:
        x = np.asarray(x, dtype=float)
        g = np.asarray(f.gradient(x), dtype=float)
        fd = finite_difference_gradient(f.value, x, h)
        denom = max(np.linalg.norm(g), np.linalg.norm(fd), 1e-12)
        rel = np.linalg.norm(g - fd) / denom
        worst = max(worst, rel)
    if worst > rel_tol:
        raise InvalidInputError(
            f"gradient disagrees with finite differences (rel err {worst:.3e})"
        )
    return worst
