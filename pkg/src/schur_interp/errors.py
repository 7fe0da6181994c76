"""Exception types raised by the interpolation engine."""


class InterpolationError(Exception):
    """Base class for all errors raised by :mod:`schur_interp`."""


class InvalidDataError(InterpolationError, ValueError):
    """Input data violate a structural requirement (shape, range, identity)."""


class NotPSDError(InterpolationError, ValueError):
    """A Hermitian form expected to be positive semidefinite is indefinite."""


class DomainError(InterpolationError, ValueError):
    """A vector lies outside the range of a pseudo square root."""


class NotSolvableError(InterpolationError):
    """The interpolation data admit no Schur-class solution."""


class ConsistencyError(InterpolationError):
    """An internal identity failed beyond tolerance (basis or algebra bug)."""


class SpectrumError(InterpolationError, ValueError):
    """A disk point lies too close to the spectrum of an operator."""


class SingularLFTError(InterpolationError):
    """The feedback loop ``I - s21 eps`` is numerically singular."""

    def __init__(self, msg, condition):
        super().__init__(msg)
        self.condition = condition
