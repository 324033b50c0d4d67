"""Exception hierarchy shared by every module of the package."""


class NBodyError(Exception):
    """Base class for all errors raised by :mod:`saari`."""


class ValidationError(NBodyError, ValueError):
    """Malformed masses, configurations or loops."""


class CollisionError(NBodyError):
    """Two bodies coincide (or come closer than the degenerate-distance threshold)."""


class NoConvergence(NBodyError):
    """An iterative minimization did not meet its tolerances."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class CollisionAbort(NoConvergence):
    """Every restart of a descent was stopped by the collision guard."""


class DegeneratePair(NBodyError):
    """A pair of bodies coincides for all times along a trigonometric loop."""


class SlowConvergence(NBodyError):
    """A series hit its term cap before reaching the requested tolerance.

    The partial sum and the tail diagnostics are attached so callers can
    still report them.
    """

    def __init__(self, message, partial_sum=None, terms_used=None, tail=None):
        super().__init__(message)
        self.partial_sum = partial_sum
        self.terms_used = terms_used
        self.tail = tail


class HypothesisViolated(NBodyError):
    """The potential is not constant along the loop."""


class SearchExhausted(NBodyError):
    """No integer multiplier inside the search range satisfied the window."""
