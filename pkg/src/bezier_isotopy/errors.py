"""Exception types raised across the package."""


class GeometryError(ValueError):
    """Base class for all errors raised by this package."""


class UnsupportedTopology(GeometryError):
    """Control net is neither open nor closed on both seams."""


class DegenerateCell(GeometryError):
    """A net cell has duplicate or collinear corner points."""


class InvalidTiling(GeometryError):
    """Patch domains do not tile the unit square."""


class SeamMismatch(GeometryError):
    """Shared boundary points of adjacent patches disagree."""


class NonManifold(GeometryError):
    """An edge is shared by more than two triangles."""


class DegenerateDerivative(GeometryError):
    """A control-net difference vector has zero length."""


class DegenerateTriangle(GeometryError):
    """A triangle has (numerically) zero area."""


class DegenerateEdge(GeometryError):
    """A polyline has repeated consecutive points."""


class SingularParametrization(GeometryError):
    """A boundary curve has a vanishing first derivative."""


class SingularMetric(GeometryError):
    """The first fundamental form is singular at a quadrature node."""


class NetFormatError(GeometryError):
    """A net file could not be parsed."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class CountMismatch(NetFormatError):
    """Point count does not match the declared degrees."""


class ClosednessMismatch(NetFormatError):
    """Declared closedness disagrees with the point data."""
