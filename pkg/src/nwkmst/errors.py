"""Exception hierarchy shared by the solver modules."""


class NwkmstError(Exception):
    """Base class for all errors raised by this package."""


class InstanceError(NwkmstError, ValueError):
    """Malformed or invalid instance data.

    ``line`` and ``field`` locate the problem when known.
    """

    def __init__(self, message, *, line=None, field=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field {field!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.line = line
        self.field = field


class InfeasibleError(NwkmstError):
    """The instance (or a sub-instance) cannot reach its quota."""


class UnreachableError(NwkmstError):
    """No path exists between the requested vertices."""


class GuessRejected(NwkmstError):
    """A skeleton / OPT guess cannot lead to a feasible solution."""


class InvariantViolation(NwkmstError, AssertionError):
    """An internal invariant failed; indicates a bug rather than bad input."""
