"""Exception types shared across the library."""


class OrdpatError(Exception):
    """Base class for every error raised by this package."""


class TieError(OrdpatError):
    """Two values inside one pattern window are exactly equal."""


class SeriesTooShort(OrdpatError):
    """The series has too few samples for the requested analysis."""


class AllWindowsTied(OrdpatError):
    """Every window was dropped because of ties; no frequencies exist."""


class WrongLength(OrdpatError):
    """An operation defined for one pattern length received another."""


class ConstraintViolation(OrdpatError):
    """A distribution violates normalization or the min/max balance constraint."""


class DegenerateAtWhiteNoise(OrdpatError):
    """Relative contributions are undefined exactly at the uniform distribution."""


class ZeroDenominator(OrdpatError):
    """The extension formula hit a zero denominator with a positive numerator."""


class NonStationaryInput(OrdpatError):
    """An operation requiring a stationary pattern measure received one that is not."""


class SizeLimit(OrdpatError):
    """Requested exact enumeration exceeds the supported size."""


class ParseError(OrdpatError):
    """An input file could not be parsed.  Carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnknownTable(OrdpatError):
    """Unknown reproduction table name."""
