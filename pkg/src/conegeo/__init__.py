"""Sphere geometries in light-cone coordinates: lifts, subgeometries,
surface classes, loops of flat connections and discrete nets."""

from .errors import (ClosureError, DegenerateError, GeometryError, InfinitePoint,
                     NoCommonSphere, NonConserved, SpaceMismatch)
from .pseudo_euclidean import LIE, MOEBIUS, Space, Vec, inner, signature_of_span

__version__ = "0.1.0"

__all__ = [
    "ClosureError", "DegenerateError", "GeometryError", "InfinitePoint", "NoCommonSphere",
    "NonConserved", "SpaceMismatch", "LIE", "MOEBIUS", "Space", "Vec", "inner",
    "signature_of_span", "__version__",
]
