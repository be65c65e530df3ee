"""Exception hierarchy for lcspec."""


class LCSpecError(Exception):
    """Base class for all numerical failures raised by lcspec."""


class DomainError(LCSpecError, ValueError):
    """Evaluation outside the domain of a coefficient field."""


class AnsatzDomainError(DomainError):
    """Semiclassical quantities requested where q <= 0 or x < x0."""


class IntegrationError(LCSpecError):
    """ODE integration failed; carries the last node that was resolved."""

    def __init__(self, message, last_node=None):
        super().__init__(message)
        self.last_node = last_node


class SolutionOverflowError(IntegrationError):
    """|u| left the floating point range."""


class ConvergenceError(LCSpecError):
    """Successive approximation did not converge."""


class AlignmentError(LCSpecError, ValueError):
    """Two sampled objects do not live on the same grid."""


class AccuracyError(LCSpecError):
    """An identity that must hold exactly is violated beyond tolerance."""


class WindowError(LCSpecError):
    """Asymptotic fit window holds too few oscillations."""


class EigenvalueProximityError(LCSpecError):
    """The spectral parameter sits on (or too close to) an eigenvalue."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class RescanError(LCSpecError):
    """Phase scan too coarse to unwrap unambiguously."""

    def __init__(self, message, suggested_points=None):
        super().__init__(message)
        self.suggested_points = suggested_points
