"""Domain exceptions for lattice coding and relay simulation.

Every error carries the process exit code the CLI reports for it.
"""


class DomainError(Exception):
    """Base for all domain-level errors raised by the library and usecases."""

    exit_code = 4


class ConfigError(DomainError):
    """An experiment configuration failed schema or range validation."""

    exit_code = 2


class EnumerationBoundError(DomainError):
    """An exhaustive enumeration would exceed the configured bound."""

    exit_code = 2


class InfeasiblePatternError(DomainError):
    """Powers do not satisfy the square-ratio alignment a protocol needs."""

    exit_code = 3


class InvalidVectorError(DomainError):
    """A real vector contains NaN or infinite entries."""


class NotACodewordError(DomainError):
    """A point is not in the scaled codebook it was checked against."""


class DegenerateCoefficientError(DomainError):
    """A combination coefficient vanishes modulo the field order."""


class NonInvertibleCoefficientError(DomainError):
    """A coefficient has no inverse modulo the field order."""


class ScaleMismatchError(DomainError):
    """Two lattice points or scales cannot be combined exactly."""


class HalfDuplexConflictError(DomainError):
    """A node transmits and listens in the same half-duplex slot."""
