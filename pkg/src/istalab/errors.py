"""Exception types shared across the library."""


class IstaLabError(Exception):
    """Base class for all istalab errors."""


class DimensionMismatchError(IstaLabError, ValueError):
    """Operands have incompatible shapes; the message names both dimensions."""


class PowerIterationError(IstaLabError, RuntimeError):
    """Dominant-eigenvalue iteration did not converge within its budget.

    Carries the last Rayleigh-quotient estimate so callers can decide
    whether it is still usable.
    """

    def __init__(self, message, last_estimate, iterations):
        super().__init__(message)
        self.last_estimate = float(last_estimate)
        self.iterations = int(iterations)


class EnumerationBudgetError(IstaLabError, ValueError):
    """A combinatorial enumeration would exceed its configured budget."""


class StepSizeError(IstaLabError, ValueError):
    """Step-size rule violated at configuration time."""


class InfeasibleStartError(IstaLabError, ValueError):
    """Initial iterate has infinite penalty value."""


class SolverRuntimeError(IstaLabError, RuntimeError):
    """Non-finite values encountered during iteration."""

    def __init__(self, message, step_index, state=None):
        super().__init__(message)
        self.step_index = int(step_index)
        self.state = state


class OptimalityError(IstaLabError, ValueError):
    """A vector claimed to be (near-)optimal fails the optimality check."""


class CertificateError(IstaLabError, ValueError):
    """Preconditions of a rate certificate are not met."""


class OracleError(IstaLabError, ValueError):
    """Sign-pattern enumeration cannot be applied to this problem."""


class ConfigError(IstaLabError, ValueError):
    """Experiment configuration is invalid; message starts with the field path."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field
