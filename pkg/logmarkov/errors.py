"""Exception hierarchy shared by every logmarkov module."""


class LogMarkovError(Exception):
    """Base class for all errors raised by logmarkov."""


class DimensionError(LogMarkovError, ValueError):
    """Register widths or layouts do not match."""


class ValidationError(LogMarkovError, ValueError):
    """A channel, spec or input document is malformed.

    Attributes:
        path: Dotted field path into the JSON document, when known.
    """

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f'{path}: {message}' if path else message)


class CapacityError(LogMarkovError):
    """An exhaustive enumeration would exceed the configured caps."""


class HypothesisViolation(LogMarkovError):
    """A precondition of the Markov-model construction does not hold."""


class UnsupportedSpecError(LogMarkovError):
    """The spec is valid but outside what the extraction formulas cover."""
