"""Exception types raised across the package."""


class SdiffError(Exception):
    """Base class for all package errors."""


class DimensionMismatchError(SdiffError, ValueError):
    pass


class DomainError(SdiffError, ValueError):
    pass


class DegeneratePlaneError(SdiffError, ValueError):
    """The two Hamiltonians do not span a 2-plane."""


class SingularDenominatorError(SdiffError, ValueError):
    """Closed-form curvature evaluated at a resonant mode pair."""


class NotEigenfunctionError(SdiffError, ValueError):
    pass


class IncompleteBasisError(SdiffError, ValueError):
    """The eigenbasis expansion does not cover the bracket."""


class FormulaTranscriptionError(SdiffError, RuntimeError):
    """A closed-form structure constant disagrees with quadrature."""


class GridMismatchError(SdiffError, ValueError):
    pass


class DivergenceError(SdiffError, FloatingPointError):
    def __init__(self, step, message=None, trajectory=None):
        self.step = step
        self.trajectory = trajectory if trajectory is not None else []
        super().__init__(message or f"non-finite state encountered at step {step}")
