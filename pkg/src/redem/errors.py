"""Exception types shared across the package."""


class RedemError(Exception):
    """Base class for every error raised by this package."""


class DomainError(RedemError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class PreconditionError(RedemError, ValueError):
    """A call violates a documented precondition."""


class OutOfRangeError(RedemError, ValueError):
    """A requested level exceeds the range of a rate function."""


class NonConvergenceError(RedemError, RuntimeError):
    """An iterative search exhausted its budget without bracketing."""


class ConfigError(RedemError, ValueError):
    """A configuration file is malformed or fails validation."""
