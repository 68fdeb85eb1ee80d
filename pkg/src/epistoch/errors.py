"""Exception types shared across the toolkit."""


class EpiError(Exception):
    """Base class for all toolkit errors."""


class DomainError(EpiError, ValueError):
    """Input lies outside the domain where an estimator or model is defined."""


class ConvergenceError(EpiError, RuntimeError):
    """An iterative solver or optimizer failed to reach its tolerance."""


class EmptyPosteriorError(EpiError, RuntimeError):
    """A rejection sampler accepted no draws."""


class SchemaError(EpiError, ValueError):
    """A data file does not match its documented schema.

    ``line`` and ``column`` locate the first violation when known.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
