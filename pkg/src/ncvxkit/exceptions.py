"""Exception types shared across the toolkit."""


class NcvxError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(NcvxError, ValueError):
    """An argument violates a documented precondition."""


class DivergedError(NcvxError, RuntimeError):
    """An iterative solver produced non-finite values or an exploding objective.

    Carries the last finite iterate and the trace collected so far.
    """

    def __init__(self, message, last_iterate=None, trace=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.trace = trace


class DegenerateComponentError(NcvxError, RuntimeError):
    """A mixture component received (numerically) zero responsibility mass."""


class GenerationError(NcvxError, RuntimeError):
    """A synthetic instance generator could not satisfy its constraints."""


class DeflationError(NcvxError, RuntimeError):
    """Tensor deflation recovered a component overlapping an earlier one."""


class ConfigError(NcvxError, ValueError):
    """A benchmark configuration is malformed or references unknown names."""
