"""Exception types shared across the package."""


class SolpotError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(SolpotError):
    """Rasters passed to an operation do not share the same grid."""


class ExtentError(SolpotError):
    """Source and target grids have no spatial overlap."""


class EmptyRasterError(SolpotError):
    """An operation that needs at least one valid pixel got none."""


class GeometryError(SolpotError):
    """A polygon ring is degenerate, unclosed, or otherwise invalid."""


class RangeError(SolpotError):
    """A supplied override value falls outside its permitted range."""


class ParseError(SolpotError):
    """A file could not be parsed; carries a location when known."""

    def __init__(self, message, *, line=None, byte_offset=None):
        if line is not None:
            message = f"{message} (line {line})"
        if byte_offset is not None:
            message = f"{message} (byte offset {byte_offset})"
        super().__init__(message)
        self.line = line
        self.byte_offset = byte_offset


class CapabilityError(SolpotError):
    """The file is recognized but uses a feature this reader does not support."""
