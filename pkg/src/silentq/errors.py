"""Exception hierarchy shared across the package.

The CLI maps :class:`ValidationError` to exit code 1 and
:class:`IdentifiabilityError` to exit code 2.
"""


class SilentQError(Exception):
    """Base class for all package errors."""


class ValidationError(SilentQError):
    """Malformed input: bad values, bad files, bad configuration."""


class IdentifiabilityError(SilentQError):
    """A parameter cannot be estimated from the given data."""


class NumericsError(SilentQError):
    """A numeric routine produced non-finite intermediates or failed to converge."""
