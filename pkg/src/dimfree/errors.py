"""Exception types shared across the package."""


class DimfreeError(Exception):
    """Base class for all errors raised by dimfree."""


class NotEquivalent(DimfreeError, ValueError):
    """Two vectors lie in different equivalence classes."""


class DimensionMismatch(DimfreeError, ValueError):
    """Operand dimensions are incompatible."""


class SingularFactor(DimfreeError, ArithmeticError):
    """A pseudo-inverse factor could not be inverted."""


class ScheduleMismatch(DimfreeError, ValueError):
    """Consecutive stages of a varying system do not chain."""


class UncontrollablePair(DimfreeError, ArithmeticError):
    """The controllability Gramian is numerically singular."""


class UnsupportedOrder(DimfreeError, ValueError):
    """Tensor order above the supported (2, 2)."""


class NotSkew(DimfreeError, ValueError):
    """A form expected to be skew-symmetric is not."""


class OddDimension(DimfreeError, ValueError):
    """A symplectic check was requested on an odd-dimensional generator."""


class MatchFailure(DimfreeError):
    """States on either side of a switch are not equivalent."""


class ScheduleError(DimfreeError, ValueError):
    """A blend schedule or scenario window is invalid."""


class NonFiniteState(DimfreeError, ArithmeticError):
    """Integration produced a non-finite state.

    Attributes
    ----------
    last_good_time : float
        Time of the last sample whose state was finite.
    """

    def __init__(self, last_good_time, message=None):
        self.last_good_time = float(last_good_time)
        super().__init__(
            message or f"non-finite state (last good t={self.last_good_time:.6g})")
