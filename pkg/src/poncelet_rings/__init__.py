"""Incidence-configuration engine: Poncelet polygons, ring operators,
celestial symbols, incircle nets, and exact rational certification."""

__version__ = "0.1.0"

from .errors import GeometryError, SymbolError
from .projective import Conic, Line, Point, ProjectiveTransform, join, meet
from .tolerances import DEFAULT, Tolerances

__all__ = [
    "__version__",
    "GeometryError",
    "SymbolError",
    "Conic",
    "Line",
    "Point",
    "ProjectiveTransform",
    "join",
    "meet",
    "DEFAULT",
    "Tolerances",
]
