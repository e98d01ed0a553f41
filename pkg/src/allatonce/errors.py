"""Exception hierarchy shared by every engine and front end."""


class AaoError(Exception):
    """Base class for all errors raised by this package."""


class GeometryError(AaoError, ValueError):
    """A geometry or constraint law failed validation."""


class UnknownNodeError(AaoError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class EvidenceError(AaoError, ValueError):
    """Evidence does not fit a geometry (unknown names, clashes, unobservable colors).

    ``problems`` lists every issue found, not just the first one.
    """

    def __init__(self, message, problems=None):
        super().__init__(message)
        self.problems = list(problems) if problems else [message]


class ContradictionError(EvidenceError):
    """Two evidence atoms assign different values to the same variable."""


class ZeroSupportError(AaoError):
    """Evidence is allowed syntactically but excludes every microstate."""


class SizeGuardError(AaoError):
    """Refusal to enumerate: the raw assignment space exceeds the configured cap."""


class ScopeError(AaoError, ValueError):
    """A query or evidence references a node missing from one of the geometries."""


class NotAPathError(GeometryError):
    pass


class GeometryPriorError(AaoError, ValueError):
    """Raised when a caller tries to weight geometries by a prior."""
