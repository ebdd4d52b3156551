"""Exception hierarchy shared by all shadowcurve modules."""


class ShadowCurveError(Exception):
    """Base class for all library errors."""


class InvalidInputError(ShadowCurveError):
    """Malformed or out-of-contract input (bad dimensions, ranges, schemas)."""


class OffSurfaceError(InvalidInputError):
    """A point that must lie on the surface is too far from it."""


class DegenerateSurfaceError(ShadowCurveError):
    """The surface gradient vanishes where a normal direction is required."""


class ConvergenceError(ShadowCurveError):
    """An iterative solve failed to converge.

    ``sample`` optionally records the segment parameter of the offending query.
    """

    def __init__(self, message, sample=None):
        super().__init__(message)
        self.sample = sample


class PreconditionError(ShadowCurveError):
    """A documented precondition of an operation does not hold."""


class DomainExitError(ShadowCurveError):
    """A trajectory left the surface's sampling domain.

    ``partial`` optionally carries the curve integrated up to the exit.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
