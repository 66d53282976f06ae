"""Exception hierarchy shared by all modules."""


class LifshitzError(Exception):
    """Base class for errors raised by lifshitz_lab."""

    exit_code = 1


class DomainError(LifshitzError, ValueError):
    """Argument outside the mathematical domain of an operation."""

    exit_code = 3


class RangeError(LifshitzError, ValueError):
    """Tabulated data queried outside its range with extrapolation disabled."""

    exit_code = 3


class ValidationError(LifshitzError, ValueError):
    """Invalid configuration; ``problems`` lists every failure found."""

    exit_code = 3

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class ConvergenceError(LifshitzError, RuntimeError):
    """A sum or quadrature did not reach its tolerance.

    The partially converged result is kept in ``partial``.
    """

    exit_code = 2

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class PrecisionError(LifshitzError, ArithmeticError):
    """A finite difference fell below the floating-point noise level."""

    exit_code = 2


class CoverageError(LifshitzError, ValueError):
    """Experiment and theory do not cover a common separation range."""

    exit_code = 4
