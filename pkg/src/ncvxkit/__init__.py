"""ncvxkit: non-convex optimization solvers with desk-scale benchmarks.

Solvers: iterative hard thresholding, singular value projection, alternating
matrix completion, robust-regression alternation, EM / hard-assignment
alternation for two-component mixtures, saddle-escaping noisy gradient
descent (plain and manifold-projected), orthogonal tensor decomposition and
phase retrieval (alternating and gradient-flow variants). The ``bench`` CLI
runs seeded solver suites and emits convergence tables.

Hot kernels (one-sided Jacobi SVD, quartic tensor contractions) run through
a compiled extension when built, with a pure-numpy fallback selected at
import; see :func:`backend_name`.
"""

from ._backend import backend_name
from .core import ConvergenceTrace, RandomSource, sample_unit_sphere
from .descent import (
    ConstantStep,
    DescentResult,
    HorizonAwareStep,
    HorizonObliviousStep,
    InverseSmoothnessStep,
    ObjectiveOracle,
    gpgd_run,
    ngd_run,
    pgd_run,
    pngd_run,
)
from .linalg import leading_eigenvector, solve_least_squares, truncated_svd
from .projections import (
    hard_threshold,
    project_l1_ball,
    project_l2_ball,
    project_low_rank,
    project_unit_sphere,
)

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "ConvergenceTrace",
    "RandomSource",
    "sample_unit_sphere",
    "ConstantStep",
    "DescentResult",
    "HorizonAwareStep",
    "HorizonObliviousStep",
    "InverseSmoothnessStep",
    "ObjectiveOracle",
    "gpgd_run",
    "ngd_run",
    "pgd_run",
    "pngd_run",
    "leading_eigenvector",
    "solve_least_squares",
    "truncated_svd",
    "hard_threshold",
    "project_l1_ball",
    "project_l2_ball",
    "project_low_rank",
    "project_unit_sphere",
    "__version__",
]
