"""Exception types shared across the package."""


class TableGameError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(TableGameError, ValueError):
    """Malformed argument: bad shape, negative margin, non-permutation sequence."""


class MarginMismatchError(InvalidInputError):
    """Margin vectors whose totals disagree (real-infeasible)."""


class EncodingInfeasibleError(TableGameError):
    """A computed plane-sum went negative: the system has no lattice point."""


class InvalidWitnessError(TableGameError, ValueError):
    """Candidate witness table violates margins or the forbidden-zero condition."""


class IllegalMoveError(TableGameError, ValueError):
    """Action outside the legal set for the current state."""


class ProjectionInfeasibleError(TableGameError):
    """The projection constraint set admits no action."""


class BudgetExhausted(TableGameError):
    """A search exceeded its node or step cap; the answer is undetermined."""
