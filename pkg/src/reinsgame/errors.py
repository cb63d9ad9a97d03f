"""Exception types raised by the package."""


class SpecError(ValueError):
    """A problem definition violates its invariants (bad rates, intervals, ...)."""


class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class ConfigError(ValueError):
    """A CLI configuration file or flag set is invalid."""


class ConvergenceError(RuntimeError):
    """Policy evaluation failed to reach the requested residual tolerance."""

    def __init__(self, message: str, residual: float, sweeps: int):
        super().__init__(message)
        self.residual = residual
        self.sweeps = sweeps
