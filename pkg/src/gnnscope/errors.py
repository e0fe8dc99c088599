"""Error taxonomy shared across the library.

Every exception carries a stable machine ``code`` so the service and CLI can
map failures to structured responses without string matching.
"""


class GnnScopeError(Exception):
    """Base class; ``code`` is a stable machine-readable identifier."""

    code = "internal-error"

    def __init__(self, message, code=None):
        super().__init__(message)
        if code is not None:
            self.code = code


class DataFormatError(GnnScopeError):
    """Malformed container / weights file (bad magic, truncation, bad index)."""

    code = "bad-format"


class ValidationError(GnnScopeError):
    """Violated precondition or invariant on otherwise well-formed input."""

    code = "invalid-input"


class NotFoundError(GnnScopeError):
    code = "not-found"


class ComputeError(GnnScopeError):
    """Numerical failure (divergence, non-finite loss)."""

    code = "compute-error"
