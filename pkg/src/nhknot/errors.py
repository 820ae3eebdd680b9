"""Exception types raised by nhknot.

All numerical failures derive from :class:`NumericalError` so the CLI can map
them to a single exit code.
"""

from __future__ import annotations


class NhKnotError(Exception):
    """Base class for every error raised by this package."""


class InvalidInputError(NhKnotError, ValueError):
    """Input is malformed: non-finite entries, wrong shape, non-Hermitian."""


class DomainError(NhKnotError, ValueError):
    """A parameter lies outside the domain where the operation is defined."""


class NumericalError(NhKnotError, ArithmeticError):
    pass


class DegeneratePointError(NumericalError):
    """The Hermitian matrix is degenerate at the requested point.

    ``safe_k`` is the nearest momentum (to the first offending sample) where
    the eigenbasis is well defined again.
    """

    def __init__(self, message, omega=None, k=None, safe_k=None):
        super().__init__(message)
        self.omega = omega
        self.k = k
        self.safe_k = safe_k


class SingularityError(NumericalError):
    """Winding integrand vanishes on the sampled loop (eigenvalue collision)."""

    def __init__(self, message, omega=None, k=None):
        super().__init__(message)
        self.omega = omega
        self.k = k


class PrecisionError(NumericalError):
    """Adaptive refinement failed to resolve the integrand."""


class GaplessError(NumericalError):
    """The Hermitian model closes its gap, so its winding is undefined."""

    def __init__(self, message, closings=()):
        super().__init__(message)
        self.closings = tuple(closings)


class DegeneracyError(NumericalError):
    """Eigenvalue tracks collide (EP or non-defective degeneracy on the ring)."""

    def __init__(self, message, k=None, separation=None):
        super().__init__(message)
        self.k = k
        self.separation = separation


class UnclassifiedTransitionError(NumericalError):
    """Evidence for a transition is inconsistent; ``diagnostics`` holds it all."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
