"""Exception types shared across the package."""


class GraySLError(Exception):
    """Base class for all package errors."""


class ConfigurationError(GraySLError):
    """Inconsistent or out-of-contract configuration (rig, sensor, timing)."""


class DomainError(GraySLError, ValueError):
    """Argument outside the documented domain of an operation."""


class IntegrityError(GraySLError):
    """Data violates a structural invariant (e.g. duplicate code in a row)."""


class ParseError(GraySLError):
    """Malformed file; message carries the offending line or record index."""
