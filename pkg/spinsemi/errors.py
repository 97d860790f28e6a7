# © spinsemi developers
#
# License: BSD (3-clause)

"""Exceptions raised by spinsemi."""


class SpinSemiError(Exception):
    """Base class of all spinsemi exceptions."""


class InputError(SpinSemiError, ValueError):
    """Invalid user input (angles, field specifications, parameters)."""


class NumericalError(SpinSemiError, ArithmeticError):
    """A computation could not be carried out to the requested accuracy."""


class NotRealPointError(InputError):
    """A stereographic pair does not describe a real point of the sphere."""


class OutOfRangeError(InputError):
    """A field was evaluated outside its domain of definition."""


class ParameterError(InputError):
    """A special-function parameter is outside the admissible set."""


class FieldSpecError(InputError):
    """A field specification or field file could not be parsed."""


class PoleError(NumericalError):
    """A coordinate or denominator hit a pole of the stereographic chart."""


class StepLimitError(NumericalError):
    """The ODE integrator exceeded the configured number of steps."""


class DegenerateLabelError(NumericalError):
    """A coherent-state label reached a pole where its azimuth is undefined."""


class BranchTrackingError(NumericalError):
    """Square-root branches could not be followed continuously in the horizon."""


class ConvergenceError(NumericalError):
    """A series did not converge within the configured number of terms."""
