"""Spectral computations for half-line Sturm-Liouville operators in the limit circle case at infinity.

The operator is ``H u = -(p u')' - q u`` on ``(0, inf)`` with ``u'(0) = alpha u(0)``.
"""

from .coefficients import (
    CoefficientField,
    ConditionReport,
    check_lc_conditions,
    eval_field,
    exponential,
    field_from_config,
    power_law,
    rho,
    semiclassical,
    tabulated,
)
from .connection import ConnectionCoefficients, connect, verify_lc2p
from .errors import (
    AccuracyError,
    AlignmentError,
    AnsatzDomainError,
    ConvergenceError,
    DomainError,
    EigenvalueProximityError,
    IntegrationError,
    LCSpecError,
    RescanError,
    SolutionOverflowError,
    WindowError,
)
from .extensions import (
    BoundaryData,
    EigenReport,
    ExtensionPoint,
    eigenvalues,
    gamma_omega,
    omega_from_t,
    resolvent_apply,
    s_fit,
    s_functionals,
    spectral_transform,
    t_from_omega,
)
from .jost import JostSolution, jost_by_integration, jost_solution, volterra_psi
from .odecore import GridSolution, integrate, regular_pair, wronskian
from .quasiresolvent import SampledFunction, boundary_form, quasiresolvent_apply

__version__ = "0.1.0"
