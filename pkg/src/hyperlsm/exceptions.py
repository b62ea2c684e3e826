"""Exception types raised across the package."""


class HyperLSMError(Exception):
    """Base class for all package errors."""


class DimensionError(HyperLSMError, ValueError):
    """Array shapes do not agree."""


class ManifoldError(HyperLSMError, ValueError):
    """A point lies off the hyperboloid sheet."""


class DomainError(HyperLSMError, ValueError):
    """An argument lies outside the domain of a map (e.g. outside the unit ball)."""


class TangentError(HyperLSMError, ValueError):
    """A vector is not tangent to the hyperboloid at the given base point."""


class DegenerateSpectrumError(HyperLSMError, ValueError):
    """An eigendecomposition lacks the signature needed to build an embedding."""


class DivergenceError(HyperLSMError, RuntimeError):
    """The optimizer produced a non-finite loss."""

    def __init__(self, iteration, message=None):
        self.iteration = iteration
        super().__init__(message or f"non-finite loss at iteration {iteration}")


class UndefinedAUCError(HyperLSMError, ValueError):
    """Held-out labels contain a single class, so AUC is undefined."""


class ParseError(HyperLSMError, ValueError):
    """Malformed input file."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
