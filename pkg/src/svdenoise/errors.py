"""Exception types raised across the package."""


class SvdDenoiseError(Exception):
    """Base class for all errors raised by svdenoise."""


class DimensionError(SvdDenoiseError, ValueError):
    """Array shapes are incompatible with the requested operation."""


class RangeError(SvdDenoiseError, ValueError):
    """A scalar parameter lies outside its admissible range."""


class ValidationError(SvdDenoiseError, ValueError):
    """A structured value (pyramid, factors, band set) violates its invariants."""


class ConvergenceError(SvdDenoiseError, ArithmeticError):
    """An iterative kernel hit its sweep cap without converging."""


class UndefinedMetricError(SvdDenoiseError, ValueError):
    """A metric has no defined value for the given inputs (e.g. empty masks)."""


class FormatError(SvdDenoiseError, ValueError):
    """Malformed or truncated file data.  ``offset`` is the byte position of the fault."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class PgmParseError(FormatError):
    """Invalid PGM header or raster."""


class ManifestError(SvdDenoiseError, ValueError):
    """Invalid dataset manifest.  ``line`` is 1-based, or None for file-level faults."""

    def __init__(self, message: str, line: int | None = None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line
