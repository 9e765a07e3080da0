"""Exception hierarchy shared by every ionlayer module."""


class IonLayerError(Exception):
    """Base class for all ionlayer errors."""


class NonPositiveLambda(IonLayerError, ValueError):
    """The ion-number parameter must be strictly positive."""


class OutOfBracket(IonLayerError, ValueError):
    """An eigenvalue candidate lies outside the open interval (0, pi^2/2)."""


class DomainError(IonLayerError, ValueError):
    """An evaluation point lies outside the admissible domain."""


class BadOrder(IonLayerError, ValueError):
    """Requested truncation order is not available for an expansion."""


class InvalidParams(IonLayerError, ValueError):
    """Solver parameters violate their preconditions."""


class DegenerateInterval(IonLayerError, ValueError):
    """The region [r, 1] is too thin to evaluate in double precision."""


class NoConvergence(IonLayerError, RuntimeError):
    """An iteration exhausted its budget.

    Attributes
    ----------
    residual : float or None
        Last residual seen before giving up.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class BlowUp(IonLayerError, RuntimeError):
    """The initial value problem diverged before reaching r = 1.

    Attributes
    ----------
    direction : int
        ``+1`` if ``v`` escaped upward, ``-1`` if downward, 0 if unknown.
    """

    def __init__(self, message, direction=0):
        super().__init__(message)
        self.direction = direction


class InvariantViolation(IonLayerError, AssertionError):
    """A computed profile failed a structural invariant.

    Attributes
    ----------
    index : int
        First grid node at which the check failed.
    """

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class QuadratureStall(IonLayerError, RuntimeError):
    """Mesh refinement did not reach the requested relative tolerance."""
