from __future__ import annotations

"""Exception types shared across the package."""


class PhotocurrentError(Exception):
    """Base class for errors raised by this package."""


class DomainError(PhotocurrentError, ValueError):
    """An argument lies outside the domain of a function."""


class UndefinedQuantityError(PhotocurrentError, ValueError):
    """The requested quantity is not defined for this input (e.g. Q at zero mean)."""


class PoleError(DomainError):
    """Evaluation point sits on or beyond a pole of an analytic continuation."""


class NonclassicalStateError(PhotocurrentError, ValueError):
    """The state has no nonnegative P function and cannot be sampled."""


class DegenerateParametersError(PhotocurrentError, ValueError):
    """Rates are such that the steady state is undefined (e.g. all zero)."""


class AccuracyError(PhotocurrentError, ArithmeticError):
    """A numerical routine missed its accuracy target.

    ``partial`` carries the best available estimate.
    """

    def __init__(self, message: str, partial: float | None = None):
        super().__init__(message)
        self.partial = partial


class ConvergenceError(PhotocurrentError, ArithmeticError):
    """An iterative routine exhausted its budget."""


class NonUniqueSteadyStateError(PhotocurrentError, ArithmeticError):
    """The Liouvillian kernel has dimension larger than one."""

    def __init__(self, message: str, degeneracy: int):
        super().__init__(message)
        self.degeneracy = degeneracy


class InfeasibleError(PhotocurrentError, ValueError):
    """The constrained optimisation problem has no feasible point."""
