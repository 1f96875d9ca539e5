"""Exception types raised by the figure renderers."""


class FiguresError(Exception):
    """Base class for every error this package raises on purpose."""


class SchemaError(FiguresError, ValueError):
    """An input CSV is missing, unreadable, or lacks required columns."""


class InvalidOptionError(FiguresError, ValueError):
    """A figure specification field is out of its allowed range."""
