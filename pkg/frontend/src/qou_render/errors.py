"""Exception hierarchy for the figure renderer.

Every error raised by this package derives from RenderError, so callers can
catch the whole family with one clause.  Validation problems (bad figure
specs, malformed input CSVs) derive from ValueError as well.
"""


class RenderError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(RenderError, ValueError):
    """An argument violates a documented precondition."""


class SchemaError(ArgumentError):
    """An input CSV does not match its published schema."""
