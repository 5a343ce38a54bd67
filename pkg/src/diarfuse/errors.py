"""Exception hierarchy. The CLI maps each class to its own exit code."""


class DiarFuseError(Exception):
    """Base class for all errors raised by this package."""


class RTTMParseError(DiarFuseError, ValueError):
    """A line of an RTTM or UEM file could not be parsed."""

    def __init__(self, message, lineno=None, source=None):
        self.lineno = lineno
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if lineno is not None:
            where += f"{lineno}: "
        elif where:
            where += " "
        super().__init__(where + message)


class ValidationError(DiarFuseError, ValueError):
    """Well-formed input that violates a data invariant."""


class ConfigError(ValidationError):
    """A generator configuration is invalid or its target is unattainable."""


class CapacityError(DiarFuseError):
    """The dense cost tensor would exceed the configured tuple budget."""


class MappingError(DiarFuseError, LookupError):
    """A label mapping does not cover a label it is applied to."""


class UndefinedMetricError(DiarFuseError, ValueError):
    """DER is undefined because no reference speech falls in the scored time."""


class InconsistentRecordingsError(DiarFuseError):
    """Input files disagree on the set of recordings (strict mode)."""
