"""Exception hierarchy shared by every package."""


class DualGradientError(Exception):
    """Base class for errors raised by the dual gradient toolkit"""


class DimensionMismatchError(DualGradientError, ValueError):
    """A vector does not match the dimension an operator expects"""


class ConstructionError(DualGradientError, ValueError):
    """An operator, penalty or problem could not be built from its inputs"""


class DomainError(DualGradientError, ValueError):
    """A point lies outside the effective domain where a finite value is required"""


class StoppingRuleError(DualGradientError, ValueError):
    """Invalid stopping-rule or step-size parameters"""


class NonFiniteIterateError(DualGradientError, ArithmeticError):
    """A solver produced NaN or Inf"""


class ConfigError(DualGradientError, ValueError):
    """Experiment configuration failed validation

    Args:
        path: Dotted path of the offending field, e.g. ``stopping.tau``
        message: What is wrong with it
    """

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")
