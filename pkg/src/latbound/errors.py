"""Exception types raised by the solvers."""

from __future__ import annotations


class InvalidArgument(ValueError):
    """Raised for malformed inputs (non-finite coordinates, bad couplings, ...)."""


class EvaluationError(ArithmeticError):
    """An integrand or determinant produced a non-finite value at a node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class PoleProximityError(EvaluationError):
    """The spectral parameter sits on (or too close to) a sampled band energy."""


class SideViolationError(ValueError):
    """The spectral parameter is not on the admissible side of the essential spectrum."""


class BracketError(RuntimeError):
    """No sign change of a determinant was found while expanding a bracket."""

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class BoundStateNotFound(RuntimeError):
    """The Fredholm determinant showed no zero in the searched window.

    ``z`` and ``values`` hold the sampled spectral parameters and determinant
    values so the caller can inspect what was seen.
    """

    def __init__(self, message, z=None, values=None):
        super().__init__(message)
        self.z = z
        self.values = values


class SolverError(RuntimeError):
    """Wraps a per-momentum failure inside a sweep; ``momentum`` tags the point."""

    def __init__(self, message, momentum=None):
        super().__init__(message)
        self.momentum = momentum


class SizeLimitError(ValueError):
    """A dense oracle matrix would exceed the configured size limit."""
