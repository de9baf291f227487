"""Generic alternating minimization over two blocks, with bistability checks."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import ConvergenceTrace
from .descent import ObjectiveOracle
from .exceptions import DivergedError, InvalidInputError

__all__ = ["BivariateOracle", "GamResult", "gam_run", "check_bistable"]


@dataclass
class BivariateOracle:
    """Objective of two blocks with marginal minimizers.

    ``argmin_x_given_y(y) -> x`` and ``argmin_y_given_x(x) -> y`` must return
    exact marginal minimizers for the alternation to be monotone.
    """

    value: Callable[[np.ndarray, np.ndarray], float]
    argmin_x_given_y: Callable[[np.ndarray], np.ndarray]
    argmin_y_given_x: Callable[[np.ndarray], np.ndarray]


@dataclass
class GamResult:
    xs: list
    ys: list
    objectives: list  # interleaved: after x-update, after y-update
    trace: ConvergenceTrace

    @property
    def final(self):
        return self.xs[-1], self.ys[-1]


def gam_run(f: BivariateOracle, init, T) -> GamResult:
    """Alternate exact marginal minimizations from ``init = (x1, y1)``.

    Records the interleaved objective sequence f(x^{t+1}, y^t),
    f(x^{t+1}, y^{t+1}), which is non-increasing by construction.
    """
    if T < 1:
        raise InvalidInputError("T must be >= 1")
    x, y = (np.asarray(init[0], dtype=float), np.asarray(init[1], dtype=float))
    xs, ys = [x], [y]
    objectives = [float(f.value(x, y))]
    trace = ConvergenceTrace()
    for t in range(1, T + 1):
        x = np.asarray(f.argmin_x_given_y(y), dtype=float)
        if not np.all(np.isfinite(x)):
            raise DivergedError("x-step returned non-finite point", last_iterate=(xs[-1], ys[-1]))
        objectives.append(float(f.value(x, y)))
        y = np.asarray(f.argmin_y_given_x(x), dtype=float)
        if not np.all(np.isfinite(y)):
            raise DivergedError("y-step returned non-finite point", last_iterate=(x, ys[-1]))
        val = float(f.value(x, y))
        objectives.append(val)
        xs.append(x)
        ys.append(y)
        trace.record(t, val)
    return GamResult(xs=xs, ys=ys, objectives=objectives, trace=trace)


def check_bistable(f: ObjectiveOracle, point, tol):
    """Is ``point`` a fixed point of alternating minimization?

    For objectives that are marginally convex in each block, bistable points
    are exactly the stationary points, so the check reduces to the gradient
    norm at the (concatenated) point. Returns (is_bistable, gradient_norm).
    """
    g = np.asarray(f.gradient(np.asarray(point, dtype=float)))
    norm = float(np.linalg.norm(g))
    return norm <= tol, norm
