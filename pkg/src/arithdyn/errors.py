"""Exception types shared across the package."""


class ArithDynError(Exception):
    """Base class for all arithdyn errors."""


class ParseError(ArithDynError):
    """Malformed polynomial or rational text."""

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class DegreeCapError(ArithDynError):
    """A polynomial operation would exceed the configured degree cap."""


class NonConvergenceError(ArithDynError):
    """A numerical iteration failed to converge.

    Carries the best-so-far data so callers can inspect how close the
    iteration got.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class UndecidedBranchError(ArithDynError):
    """A p-adic orbit branch neither escaped nor showed a repeating
    valuation pattern within the iteration budget."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class CrossCheckError(ArithDynError):
    """Two independent algorithms disagreed beyond their combined error
    bounds.  This is a correctness tripwire, never a warning."""


class CoincidentPointsWarning(UserWarning):
    """Pairwise-distance statistics were asked for a multiset with
    coincident points."""
