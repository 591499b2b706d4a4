"""Exception types raised across the package."""


class SpinLLGError(Exception):
    """Base class for simulation and analysis failures."""


class StiffnessError(SpinLLGError):
    """The adaptive step size fell below the allowed minimum."""


class SizeError(SpinLLGError):
    """A dense Hilbert space would exceed the configured dimension cap."""


class NumericalError(SpinLLGError):
    """A dense linear-algebra routine failed."""


class WindowError(SpinLLGError):
    """The trajectory does not cover enough relaxation to fit."""


class PreconditionError(SpinLLGError):
    """An analysis window violates the operation's precondition."""


class DegenerateInputError(SpinLLGError):
    """The input signal carries no usable spectral peak."""
