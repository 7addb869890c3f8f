"""Exception hierarchy shared by all modules."""


class CPQuenchError(Exception):
    """Base class for every error raised by this package."""


class DomainError(CPQuenchError, ValueError):
    """Argument outside the domain of a function."""


class ConfigError(CPQuenchError, ValueError):
    """Invalid physical or numerical configuration."""


class DivergenceError(CPQuenchError, ArithmeticError):
    """A requested integral diverges (e.g. zero frequency with non-zero phase)."""


class WindowError(CPQuenchError, ArithmeticError):
    """Evaluation time falls inside a light-cone exclusion window."""


class ConvergenceError(CPQuenchError, ArithmeticError):
    """A numerical procedure failed to reach its requested tolerance."""
