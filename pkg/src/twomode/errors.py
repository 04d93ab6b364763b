"""Exception and warning types raised across the package."""


class TwoModeError(Exception):
    """Base class for all package errors."""


class NullState(TwoModeError, ValueError):
    """The requested superposition has vanishing norm."""


class TruncationTooLarge(TwoModeError, ValueError):
    """The truncation needed to meet a tail bound exceeds the ceiling."""


class TruncationTooSmall(TwoModeError, ValueError):
    """The truncation is too small for the requested evaluation."""


class DimensionMismatch(TwoModeError, ValueError):
    pass


class ClosedFormDomainError(TwoModeError, ValueError):
    """A closed form was requested outside the regime where it holds."""


class DetuningNotSupported(ClosedFormDomainError):
    pass


class UnsupportedPhase(ClosedFormDomainError):
    pass


class ConfigError(TwoModeError):
    """Invalid experiment configuration.

    ``field`` names the offending key and ``line`` the source line when the
    problem is a JSON syntax error.
    """

    def __init__(self, message, field=None, line=None):
        self.message = message
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class TruncationWarning(UserWarning):
    """Fock tail mass beyond the truncation exceeds the requested bound."""


class RWCValidityWarning(UserWarning):
    """Coupling or detuning is not small against the mode frequencies."""
