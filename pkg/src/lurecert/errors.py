"""Exception types shared across the package."""


class LurecertError(Exception):
    """Base class for all package-specific errors."""


class InvalidInput(LurecertError):
    """Malformed or inconsistent input data."""


class NotRankOne(LurecertError):
    """A dual solution could not be factored as a rank-1 matrix."""

    def __init__(self, message, ratio=None):
        super().__init__(message)
        self.ratio = ratio


class UnsupportedBand(LurecertError):
    """Requested slope band outside the supported analysis."""


class UnsupportedDimension(LurecertError):
    """Operation only defined for a specific state dimension."""


class ToleranceConflict(LurecertError):
    """Both sides of an alternative pair reported feasible."""


class SolverInconsistency(LurecertError):
    """A solver-reported point failed independent re-checking."""


class InconsistentWitness(LurecertError):
    """Witness data violates the consistency guarantees it should satisfy."""


class WellPosednessError(LurecertError):
    """The algebraic output loop failed to converge."""
