"""Exception types shared across the toolkit."""


class TagTourError(Exception):
    """Base class for all toolkit errors."""


class InvalidTagNumber(TagTourError):
    """Tag number outside the printable range 1..20."""


class InvalidImage(TagTourError):
    """Degenerate or malformed raster input."""


class InvalidScene(TagTourError):
    """Scene specification violates placement constraints."""


class InvalidProperty(TagTourError):
    """Property manifest violates uniqueness constraints."""


class IoError(TagTourError):
    """Wraps OS-level read/write failures."""


class EmptyInput(TagTourError):
    """An operation received an empty collection it cannot reduce."""


class ParseError(TagTourError):
    """Malformed external annotation or config data."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
