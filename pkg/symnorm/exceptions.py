"""symnorm custom exceptions."""


class SymnormException(Exception):
    """Base exception for all symnorm errors."""

    pass


class ValidationError(SymnormException):
    """Parameter or precondition check failed."""

    pass


class StreamError(ValidationError):
    """Stream update out of range or magnitude bound exceeded."""

    pass


class InfeasibleSpecError(ValidationError):
    """Stream specification cannot be realized."""

    pass


class SketchMismatchError(ValidationError):
    """Sketches with different seeds or shapes cannot be merged."""

    pass


class ConfigError(SymnormException):
    """Configuration document is malformed."""

    pass


class CalibrationError(SymnormException):
    """Concentration calibration (mmc) is unavailable."""

    pass


class EncodingError(SymnormException):
    """Encoding operation failed."""

    pass


class DecodingError(SymnormException):
    """Decoding operation failed."""

    pass
