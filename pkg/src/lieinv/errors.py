"""Exception hierarchy for the lieinv package."""


class LieInvError(Exception):
    """Base class for all package errors."""


class TowerError(LieInvError):
    """Expression leaves the supported function tower (rationals, +, *, integer
    powers, exp, log)."""


class ResourceLimitError(LieInvError):
    """Expression exceeded the configured size/depth budget."""


class ParseError(LieInvError):
    """Malformed expression text."""

    def __init__(self, message, position=None):
        super().__init__(message if position is None else f"{message} (at column {position})")
        self.position = position


class DomainEvalError(LieInvError):
    """Numeric evaluation hit a domain violation (e.g. log of a non-positive
    number)."""


class UnboundVariableError(LieInvError):
    """Numeric evaluation requested with unbound variables."""


class PivotUndecidableError(LieInvError):
    """Exact elimination could not certify a matrix entry zero or nonzero."""

    def __init__(self, entry, row, col):
        super().__init__(f"cannot certify matrix entry at ({row}, {col}) zero or nonzero: {entry}")
        self.entry = entry
        self.row = row
        self.col = col


class UnsupportedFieldError(LieInvError):
    """A computation requires eigenvalues outside the rational function field.

    ``minimal_polynomial`` carries the offending irreducible factor.
    """

    def __init__(self, message, minimal_polynomial=None):
        if minimal_polynomial is not None:
            message = f"{message}; minimal polynomial: {minimal_polynomial}"
        super().__init__(message)
        self.minimal_polynomial = minimal_polynomial


class PolarizationNotFoundError(LieInvError):
    """No polarization of the required dimension was found."""


class DegenerateCovectorError(LieInvError):
    """The supplied covector is degenerate (orbit not of maximal dimension)."""


class ConstructionError(LieInvError):
    """An internal construction failed its own correctness contract."""


class EliminationError(LieInvError):
    """Canonical variables could not be fully eliminated.

    ``implicit_forms`` holds the partially eliminated orbit equations.
    """

    def __init__(self, message, implicit_forms=()):
        super().__init__(message)
        self.implicit_forms = tuple(implicit_forms)


class GradientInversionError(LieInvError):
    """The gradient map of a Legendre transform could not be inverted."""

    def __init__(self, message, unsolved=()):
        super().__init__(message)
        self.unsolved = tuple(unsolved)


class SelectionIncompleteError(LieInvError):
    """Fewer coordinate-only Casimirs than required; partial result attached."""

    def __init__(self, message, partial=None, casimirs=None):
        super().__init__(message)
        self.partial = partial
        self.casimirs = casimirs


class StageError(LieInvError):
    """Pipeline failure with stage attribution."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


class ProblemFileError(LieInvError):
    """Malformed problem description file."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field
