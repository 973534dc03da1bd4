# Licensed under the Apache License: http://www.apache.org/licenses/LICENSE-2.0
# For details: see the NOTICE file at the repository root

from typing import Optional, Sequence


class TwrnError(Exception):
    """
    Base class for every error raised by the toolkit
    """


class ConfigError(ValueError, TwrnError):
    """
    A network configuration failed validation. `field` names the offending key.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class NumericalError(TwrnError):
    """
    Base class for failures of the numerical layer (exit code 3 on the command line)
    """


class QuadratureError(NumericalError):

    def __init__(self, message: str, partial: float, abs_error: float, evaluations: int):
        super().__init__(
            f"{message} (partial estimate {partial:.12g}, error estimate {abs_error:.3g}, "
            f"{evaluations} evaluations)"
        )
        self.partial = partial
        self.abs_error = abs_error
        self.evaluations = evaluations


class DegenerateChainError(NumericalError):

    def __init__(self, message: str, labels: Optional[Sequence[str]] = None):
        super().__init__(message)
        self.labels = tuple(labels or ())


class InfiniteEnergyError(NumericalError):
    """
    No information bit is ever delivered, so the energy per bit is unbounded
    """


class UndefinedRateError(NumericalError):
    pass


class NoFeasibleRateError(NumericalError):
    pass


class LabelMismatchError(TwrnError):
    pass
