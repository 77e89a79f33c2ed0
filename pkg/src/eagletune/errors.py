"""Exception hierarchy shared across the package."""


class EagleTuneError(Exception):
    """Base class for every error raised by eagletune."""


class NotHurwitz(EagleTuneError, ValueError):
    pass


class SingularSystem(EagleTuneError, ArithmeticError):
    pass


class NonFinite(EagleTuneError, ArithmeticError):
    pass


class InvalidTimeStep(EagleTuneError, ValueError):
    pass


class DomainError(EagleTuneError, ValueError):
    pass


class UnknownName(EagleTuneError, KeyError):
    pass


class BudgetTooSmall(EagleTuneError, ValueError):
    pass


class ConfigError(EagleTuneError):
    """Anything wrong with a run configuration file."""


class ParseError(ConfigError):
    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class ValidationError(ConfigError, ValueError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
