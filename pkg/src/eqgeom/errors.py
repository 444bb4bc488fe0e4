"""Exception hierarchy shared by every module of the package."""


class EqGeomError(Exception):
    """Base class for all package errors."""


class ValidationError(EqGeomError, ValueError):
    """An economy or input violates a structural invariant."""


class DomainError(EqGeomError, ValueError):
    """A parameter value lies outside the certified t-domain."""


class SingularMetricError(EqGeomError, ArithmeticError):
    """det g is numerically zero: the parametrization is not an immersion here."""

    def __init__(self, message, t=None, alpha=None):
        super().__init__(message)
        self.t = t
        self.alpha = alpha


class DegeneratePlaneError(EqGeomError, ArithmeticError):
    """Two basis fields span a degenerate plane."""


class DomainExitError(EqGeomError):
    """A geodesic left the certified t-domain before s = 1."""

    def __init__(self, message, s, coords):
        super().__init__(message)
        self.s = s
        self.coords = coords


class StiffnessError(EqGeomError, ArithmeticError):
    """The adaptive integrator step fell below its minimum."""

    def __init__(self, message, s):
        super().__init__(message)
        self.s = s


class NonConvergenceError(EqGeomError, ArithmeticError):
    """Newton shooting failed to converge."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


class RefinementStallError(EqGeomError, ArithmeticError):
    """Fixed-point selection refinement stopped making progress."""

    def __init__(self, message, residual, iterations):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
