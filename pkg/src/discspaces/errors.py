"""Exception hierarchy shared by the discspaces modules."""

from __future__ import annotations


class DiscSpacesError(Exception):
    """Base class for all library errors."""


class RangeError(DiscSpacesError):
    """A computation left its supported numeric range.

    ``partial`` carries whatever value had been accumulated when the
    limit was hit (``None`` if nothing useful exists).
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class ToleranceNotMet(DiscSpacesError):
    """Adaptive refinement stopped before reaching the requested tolerance."""

    def __init__(self, message: str, estimate=None, error_estimate=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_estimate = error_estimate


class InfeasibleError(DiscSpacesError):
    """The witness builder exhausted a search at some step."""

    def __init__(self, message: str, step: int, inequality: str):
        super().__init__(message)
        self.step = step
        self.inequality = inequality


class PreconditionError(DiscSpacesError):
    """A documented precondition of an experiment does not hold."""

    def __init__(self, message: str, deficit=None):
        super().__init__(message)
        self.deficit = deficit


class NotFoundError(DiscSpacesError):
    """A search over a finite schedule found nothing acceptable."""


class NotApplicableError(DiscSpacesError):
    """The operation has no meaning for the given witness and parameter."""
