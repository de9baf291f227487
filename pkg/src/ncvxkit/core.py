"""Randomness and trace primitives shared by every solver.

All stochastic operations in the toolkit take an explicit :class:`RandomSource`
so that runs are reproducible bit for bit, and independent sub-streams can be
derived for parallel work.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidInputError

__all__ = ["RandomSource", "ConvergenceTrace", "check_finite", "sample_unit_sphere"]


class RandomSource:
    """Seedable deterministic pseudo-random stream.

    Identical seeds yield bit-identical streams. Labeled sub-streams derived
    through :meth:`split` are independent of the parent stream and of each
    other, and do not disturb the parent's state.
    """

    def __init__(self, seed, _spawn_key=()):
        self.seed = int(seed)
        self._spawn_key = tuple(_spawn_key)
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(self.seed, spawn_key=self._spawn_key))
        )

    def split(self, label) -> "RandomSource":
        """Derive an independent stream keyed by ``label`` (str or int)."""
        if isinstance(label, str):
            key = zlib.crc32(label.encode("utf-8"))
        else:
            key = int(label)
        return RandomSource(self.seed, self._spawn_key + (key,))

    # -- sampling helpers -------------------------------------------------

    def normal(self, *shape):
        return self._gen.standard_normal(shape) if shape else self._gen.standard_normal()

    def uniform(self, low=0.0, high=1.0, size=None):
        return self._gen.uniform(low, high, size)

    def integers(self, low, high=None, size=None):
        return self._gen.integers(low, high, size)

    def choice(self, n, size, replace=False):
        return self._gen.choice(n, size=size, replace=replace)

    def permutation(self, n):
        return self._gen.permutation(n)

    def rademacher(self, *shape):
        return 2.0 * self._gen.integers(0, 2, shape) - 1.0

    def complex_normal(self, *shape):
        """Entries distributed as N(0,1) + i*N(0,1)."""
        return self._gen.standard_normal(shape) + 1j * self._gen.standard_normal(shape)

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, spawn_key={self._spawn_key})"


def check_finite(arr, name="input"):
    """Validate that an array (or scalar) contains only finite entries."""
    a = np.asarray(arr)
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains non-finite entries")
    return a


def sample_unit_sphere(dim, rand: RandomSource):
    """Uniform sample from the unit sphere in R^dim, obtained by normalizing
    a standard Gaussian draw."""
    if dim < 1:
        raise InvalidInputError(f"dim must be >= 1, got {dim}")
    w = rand.normal(dim)
    nrm = np.linalg.norm(w)
    while nrm < 1e-12:  # astronomically unlikely; redraw for safety
        w = rand.normal(dim)
        nrm = np.linalg.norm(w)
    return w / nrm


@dataclass
class ConvergenceTrace:
    """Per-iteration record of a solver run.

    ``errors`` holds distance-to-truth when the ground truth is known and
    NaN otherwise. Iteration indices start at 1 and increase strictly.
    """

    iterations: list = field(default_factory=list)
    objectives: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    elapsed: list = field(default_factory=list)

    def record(self, iteration, objective, error=np.nan, elapsed_seconds=0.0):
        if not self.iterations and iteration != 1:
            raise InvalidInputError("trace iterations start at 1")
        if self.iterations and iteration <= self.iterations[-1]:
            raise InvalidInputError("trace iterations must increase strictly")
        self.iterations.append(int(iteration))
        self.objectives.append(float(objective))
        self.errors.append(float(error) if error is not None else np.nan)
        self.elapsed.append(float(elapsed_seconds))

    def __len__(self):
        return len(self.iterations)

    def as_arrays(self):
        return (
            np.asarray(self.iterations, dtype=int),
            np.asarray(self.objectives, dtype=float),
            np.asarray(self.errors, dtype=float),
            np.asarray(self.elapsed, dtype=float),
        )
