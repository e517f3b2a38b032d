"""Exception hierarchy.

Everything raised on purpose by the geometry code derives from
``GeometryError``; the CLI maps it to exit code 3.
"""


class GeometryError(ValueError):
    """Base class for geometric degeneracies and contract violations."""

    def __init__(self, message, object_id=None):
        super().__init__(message)
        self.object_id = object_id


class SpaceMismatch(GeometryError):
    pass


class DegenerateError(GeometryError):
    pass


class InfinitePoint(DegenerateError):
    """The point is at infinity of the requested chart."""


class NoCommonSphere(DegenerateError):
    pass


class NonConserved(GeometryError):
    """Characteristic polynomial coefficients vary over the grid."""


class ClosureError(GeometryError):
    pass
