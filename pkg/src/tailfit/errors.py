"""Exception types shared across the toolkit."""


class ParameterError(ValueError):
    """A distribution or configuration parameter is invalid (e.g. scale <= 0)."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class DegenerateSampleError(ValueError):
    """A sample has no usable spread (constant values, zero variance)."""


class LogFormatError(ValueError):
    """A latency log file violates the expected CSV format."""


class NotConvergedError(RuntimeError):
    """An operation requires a converged fit but got an unconverged one."""


class StderrUnavailableError(RuntimeError):
    """Standard errors were requested but could not be computed for this fit."""


class ProbeError(RuntimeError):
    """A measurement run could not be executed (unwritable target, no space)."""
