"""Exception types raised across the package.

Validation problems (bad input, impossible configuration) derive from
:class:`ValidationError`; the CLI maps them to exit code 2.
"""


class PepcdError(Exception):
    """Base class for all package errors."""


class ValidationError(PepcdError, ValueError):
    """Input rejected before any computation started."""


class DimensionMismatch(ValidationError):
    pass


class InsufficientPoints(ValidationError):
    pass


class DegenerateInput(ValidationError):
    """Points lie in a lower-dimensional affine subspace."""


class DegenerateSimplex(ValidationError):
    pass


class OutsideSimplex(ValidationError):
    pass


class OutsideCell(ValidationError):
    pass


class NotInOuterSimplex(ValidationError):
    pass


class UnboundedRay(PepcdError):
    pass


class EmptyNonTarget(ValidationError):
    pass


class CoincidentPoints(ValidationError):
    """A target point coincides with a non-target point."""


class EmptyDigraph(ValidationError):
    pass


class TooLarge(ValidationError):
    pass


class EmptyClass(ValidationError):
    pass


class SingleClass(ValidationError):
    pass


class NoValidClassifier(ValidationError):
    pass


class NoDecision(PepcdError):
    pass


class InvalidParameter(ValidationError):
    pass


class TooFewPoints(ValidationError):
    pass


class RankDeficient(ValidationError):
    pass


class ParseError(ValidationError):
    """CSV content could not be parsed; carries a 1-based row and column."""

    def __init__(self, message: str, row: int | None = None, col: int | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if col is not None:
            where.append(f"column {col}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)
        self.row = row
        self.col = col


class MissingLabel(ParseError):
    pass


class NonNumericFeature(ParseError):
    pass


class ConfigError(ValidationError):
    pass
