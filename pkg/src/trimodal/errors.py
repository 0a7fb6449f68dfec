"""Exception types raised across the package."""


class TrimodalError(Exception):
    """Base class for all package errors."""


class PoleError(TrimodalError, ArithmeticError):
    """theta*cot(theta) evaluated at a pole of sin."""


class InfeasiblePhase(TrimodalError, ValueError):
    """No positive mu reproduces the requested common value for this phase."""


class BranchRootFailure(TrimodalError):
    pass


class CurveEscape(TrimodalError):
    """The traced curve left the region where a > 1 and the theta ordering hold."""


class NoThirdMode(TrimodalError):
    pass


class DomainCollapse(TrimodalError, ValueError):
    """The surface touched the bed: min(1 + eta) <= 0."""


class GridMismatch(TrimodalError, ValueError):
    pass


class NewtonDivergence(TrimodalError):
    def __init__(self, msg, iterations=0, residual=float("nan")):
        super().__init__(msg)
        self.iterations = iterations
        self.residual = residual


class AdmissibilityViolation(UserWarning):
    """Amplitude vector outside the certified region for this modal class."""


class DegenerateTriple(TrimodalError, ValueError):
    """Wavenumbers coincide after gcd reduction."""
