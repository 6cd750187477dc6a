"""Exception hierarchy shared by every module of the package."""


class SeaError(Exception):
    """Base class for all package errors."""


class ArgumentError(SeaError, ValueError):
    """Inputs of the wrong shape, dimension, sign or finiteness."""


class ValidationError(SeaError, ValueError):
    """A matrix failed the Hermitian or density-operator checks."""


class DegenerateSpreadError(SeaError):
    """An observable has zero spread where a positive one is required."""


class NoSolutionError(SeaError):
    """A canonical distribution does not exist for the requested target."""


class DegenerateGeneratorsError(SeaError):
    """The Gram matrix of the conserved generators is singular."""


class IntegrationError(SeaError):
    """Numerical breakdown while integrating a trajectory.

    ``last_time`` and ``last_state`` hold the last state that passed the
    validity checks.
    """

    def __init__(self, message, last_time=None, last_state=None):
        super().__init__(message)
        self.last_time = last_time
        self.last_state = last_state


class StepUnderflowError(IntegrationError):
    """The adaptive controller hit ``dt_min`` without meeting tolerance."""


class DeltaTooLargeError(ArgumentError):
    """The near-false-target construction left a negative occupation."""
