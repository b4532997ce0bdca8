"""Exception hierarchy shared by every lhvlab module."""


class LhvLabError(Exception):
    """Base class for all errors raised by lhvlab."""


class DimensionError(LhvLabError, ValueError):
    """Operand shapes are inconsistent with each other."""


class DomainError(LhvLabError, ValueError):
    """An argument lies outside the domain of the operation."""


class NormalizationError(DomainError):
    """A state vector or distribution is not normalized."""


class NonUnitaryError(DomainError):
    """A matrix expected to be unitary is not."""


class NotEntangledError(DomainError):
    """A pure state has Schmidt rank one."""


class ConvergenceError(LhvLabError, RuntimeError):
    """An iterative routine hit its iteration cap."""


class CapacityError(LhvLabError):
    """A strategy space would exceed the enumeration cap."""

    def __init__(self, required: int, cap: int):
        super().__init__(
            f"strategy enumeration needs {required} entries, cap is {cap}"
        )
        self.required = required
        self.cap = cap


class SolverError(LhvLabError, RuntimeError):
    """A solver failed in a way that prevents a verdict."""


class IndeterminateError(SolverError):
    """The numerical evidence does not separate the two verdicts."""
