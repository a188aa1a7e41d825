"""Exception hierarchy shared by every tvsr module."""


class SRError(Exception):
    """Base class for all errors raised by tvsr."""


class DimensionError(SRError, ValueError):
    """Shapes or lengths do not agree."""


class UnknownKernelError(SRError, ValueError):
    pass


class FormatError(SRError, ValueError):
    """Malformed or truncated PGM data."""


class SizeCapError(SRError, ValueError):
    pass


class DegenerateSignalError(SRError, ValueError):
    """Noise calibration requested on a zero-variance image."""


class NumericalError(SRError, ArithmeticError):
    pass


class UnsupportedVariantError(SRError, ValueError):
    pass


class EmptyObservationError(SRError, ValueError):
    pass


class DomainError(SRError, ValueError):
    pass


class ConfigSyntaxError(SRError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ConfigValueError(SRError, ValueError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")
