"""Typed error hierarchy.

Geometric degeneracies raise rather than returning NaN; the real-only
policy means any complex branch is an error as well.
"""


class GeometryError(Exception):
    """Base class for all geometric failures."""


# -- projective core -------------------------------------------------------

class CoincidentPoints(GeometryError):
    pass


class CoincidentLines(GeometryError):
    pass


class PointNotOnConic(GeometryError):
    pass


class DegenerateConic(GeometryError):
    pass


class ComplexIntersection(GeometryError):
    """A quadratic had negative discriminant; the engine stays real."""


class DegeneratePointSet(GeometryError):
    pass


class NotGenericPosition(GeometryError):
    pass


# -- poncelet builder ------------------------------------------------------

class PointInsideConic(GeometryError):
    pass


class PointOnConic(GeometryError):
    pass


class RotationNumberOutOfRange(GeometryError):
    pass


class NoConvergence(GeometryError):
    pass


class ClosureFailure(GeometryError):
    pass


# -- ring operators / grids ------------------------------------------------

class ConicFitFailure(GeometryError):
    pass


class CoDependenceViolation(GeometryError):
    pass


class NoEquivalenceFound(GeometryError):
    pass


# -- celestial symbols -----------------------------------------------------

class SymbolError(ValueError):
    """Base for symbol grammar / constraint violations."""


class SymbolSyntaxError(SymbolError):
    pass


class LetterOutOfRange(SymbolError):
    pass


class AdjacentRepeat(SymbolError):
    pass


# -- incircle nets ---------------------------------------------------------

class LineThroughCenter(GeometryError):
    pass


class NoIncircle(GeometryError):
    pass


# -- exact oracle ----------------------------------------------------------

class SpecialPosition(GeometryError):
    """Squared coordinates proportional; the diagonal conic is undetermined."""


class DegenerateParameters(GeometryError):
    pass


class NonZeroResidualPolynomial(GeometryError):
    pass


# -- serialization ---------------------------------------------------------

class SchemaError(ValueError):
    """Invalid scene document; carries a JSON-pointer-ish path."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
