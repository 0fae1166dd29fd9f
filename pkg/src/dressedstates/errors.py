"""Exception hierarchy. CLI exit codes are attached to the classes."""


class DressedStatesError(Exception):
    exit_code = 1


class ConfigError(DressedStatesError, ValueError):
    exit_code = 2


class GridMismatchError(DressedStatesError, ValueError):
    exit_code = 2


class NumericalError(DressedStatesError, ArithmeticError):
    exit_code = 3


class SpectrumError(NumericalError):
    pass


class StabilityError(NumericalError):
    pass


class ContinuityError(NumericalError):
    pass


class IntegrationAccuracyError(NumericalError):
    pass


class DegeneracyError(NumericalError):
    pass


class DepletionSingularityError(NumericalError):
    """|a_n(t')| fell below the floor inside the probe window."""

    exit_code = 4

    def __init__(self, message, state=None, time=None):
        super().__init__(message)
        self.state = state
        self.time = time
