"""Exception types shared across the package."""

from __future__ import annotations


class IrtAuditError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(IrtAuditError, ValueError):
    """Inputs violate a documented contract (shapes, domains, file formats)."""


class BoundaryScoreError(IrtAuditError):
    """A maximum-likelihood ability does not exist for this response pattern.

    Raised for zero and perfect raw scores, and for sufficient-statistic
    values at or outside the attainable range.  ``code`` is one of
    ``"zero_score"`` or ``"perfect_score"``.
    """

    def __init__(self, message: str, code: str):
        super().__init__(message)
        self.code = code


class NonConvergenceError(IrtAuditError):
    """An iterative fit failed to reach its tolerance.

    Calibration normally reports non-convergence through result flags
    instead of raising; this error is reserved for callers that request
    strict behavior.
    """
