"""Connection coefficients between the regular and the Jost solutions.

With ``{f_z, conj f_zbar} = 2i`` the regular solutions decompose as

    phi_z   = sigma_+(z) f_z + sigma_-(z) conj f_zbar,
    theta_z = tau_+(z)   f_z + tau_-(z)   conj f_zbar,

so ``2i sigma_+ = {phi_z, conj f_zbar}`` and ``2i sigma_- = -{phi_z, f_z}``
(and likewise for ``tau``).  All four Wronskians are read off at one
matching node; their spread over ``[x0, X_inf]`` is the accuracy check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .coefficients import CoefficientField
from .errors import AccuracyError
from .jost import jost_solution
from .odecore import check_im_z, regular_pair, solver_grid, wronskian, zscale_for

CONNECT_TOL = 1e-10
# Relative Wronskian spread that is still accepted as "constant".
SPREAD_LIMIT = 1e-6


@dataclass(frozen=True)
class ConnectionCoefficients:
    sigma_plus: complex
    sigma_minus: complex
    tau_plus: complex
    tau_minus: complex
    z: complex
    x_match: float
    cond: float
    spread: float = 0.0
    X_inf: float = math.nan

    @property
    def wro_residual(self):
        """``|2i (sigma_+ tau_- - sigma_- tau_+) - 1|``."""
        return abs(2j * (self.sigma_plus * self.tau_minus - self.sigma_minus * self.tau_plus) - 1.0)

    def as_row(self):
        z = complex(self.z)
        vals = [z.real, z.imag]
        for c in (self.sigma_plus, self.sigma_minus, self.tau_plus, self.tau_minus):
            vals += [c.real, c.imag]
        return vals + [self.wro_residual]


TABLE_HEADER = [
    "re_z", "im_z",
    "re_sigma_plus", "im_sigma_plus", "re_sigma_minus", "im_sigma_minus",
    "re_tau_plus", "im_tau_plus", "re_tau_minus", "im_tau_minus",
    "wro_residual",
]


def coefficient_table(coeffs, fh=None):
    """CSV table of a sequence of :class:`ConnectionCoefficients`."""
    from .cli import write_csv

    return write_csv(TABLE_HEADER, [c.as_row() for c in coeffs], fh)


def solution_set(field: CoefficientField, z, X_inf=None, tol=CONNECT_TOL):
    """``(phi_z, theta_z, f_z, conj f_zbar)`` on one shared grid over ``[0, X_inf]``."""
    z = complex(z)
    X = field.default_x_inf() if X_inf is None else float(X_inf)
    grid = solver_grid(field, X, zscale_for(z))
    phi, theta = regular_pair(field, z, tol=tol, grid=grid)
    f = jost_solution(field, z, X_inf=X, grid=grid).f
    fbar = f.conj() if z.imag == 0 else jost_solution(field, z.conjugate(), X_inf=X, grid=grid).f.conj()
    return phi, theta, f, fbar


def default_match_point(field: CoefficientField, X):
    """Node where the phase is half its value at ``X``."""
    from scipy.optimize import brentq

    target = 0.5 * float(field.phase(X))
    return float(brentq(lambda t: field.phase(t) - target, field.x0, X, xtol=1e-12))


def _relative_spread(w, lo):
    seg = w[lo:]
    ref = seg[seg.size // 2]
    return float(np.max(np.abs(seg - ref)) / max(abs(ref), 1e-300))


@lru_cache(maxsize=1024)
def _connect_cached(field, z, x_match, tol, X, spread_limit):
    phi, theta, f, fbar = solution_set(field, z, X, tol)
    if x_match is None:
        x_match = default_match_point(field, X)
    if not (0.0 <= x_match <= X):
        raise ValueError(f"x_match={x_match} outside [0, {X}]")
    i = int(np.argmin(np.abs(phi.nodes - x_match)))
    lo = int(np.searchsorted(phi.nodes, field.x0))
    ws = {
        "sp": wronskian(phi, fbar), "sm": wronskian(phi, f),
        "tp": wronskian(theta, fbar), "tm": wronskian(theta, f),
    }
    spread = max(_relative_spread(w, lo) for w in ws.values())
    if spread > spread_limit:
        raise AccuracyError(f"Wronskian varies by {spread:.2e} (relative) across [x0, X_inf]")
    sp, sm = ws["sp"][i] / 2j, -ws["sm"][i] / 2j
    tp, tm = ws["tp"][i] / 2j, -ws["tm"][i] / 2j
    return ConnectionCoefficients(
        complex(sp), complex(sm), complex(tp), complex(tm), z, float(phi.nodes[i]),
        float(abs(sp) + abs(sm)), spread, X,
    )


def connect(field: CoefficientField, z, x_match=None, tol=CONNECT_TOL, X_inf=None, spread_limit=SPREAD_LIMIT):
    """``sigma_pm(z)``, ``tau_pm(z)`` from Wronskians at ``x_match``.

    Results are memoised per ``(field, z, x_match, tol, X_inf)``.
    """
    z = check_im_z(z)
    X = field.default_x_inf() if X_inf is None else float(X_inf)
    xm = None if x_match is None else float(x_match)
    return _connect_cached(field, complex(z), xm, float(tol), X, float(spread_limit))


# ------------------------------------------------------------- dissipation
def norm_tail(field: CoefficientField, coeffs: ConnectionCoefficients, X):
    """Estimate of ``int_X^inf |phi_z|^2`` and a bound on the neglected cross term.

    Beyond ``X``, ``|psi_z|^2 ~ exp(Im z int_x^inf a^2)``, hence
    ``|phi_z|^2 ~ a^2 (|s_+|^2 e^{y A} + |s_-|^2 e^{-y A}) + oscillatory`` with
    ``A(x) = int_x^inf a^2`` and ``y = Im z``.
    """
    if not field.analytic:
        return 0.0, math.inf
    y = complex(coeffs.z).imag
    sp2, sm2 = abs(coeffs.sigma_plus) ** 2, abs(coeffs.sigma_minus) ** 2

    def dens(t):
        a2 = float(field.weight(t))
        A = float(field.weight_tail(t))
        return a2 * (sp2 * math.exp(y * A) + sm2 * math.exp(-y * A))

    val, _ = integrate.quad(dens, X, field.tail_horizon(X), limit=200, epsabs=1e-15, epsrel=1e-12)
    cross = 2.0 * abs(coeffs.sigma_plus * coeffs.sigma_minus) * float(field.weight(X)) / float(field.xi(X))
    return float(val), float(cross)


def phi_norm_squared(field: CoefficientField, z, X_inf=None, tol=CONNECT_TOL, coeffs=None):
    """``||phi_z||^2`` on ``[0, X_inf]`` plus the tail estimate; returns ``(total, tail, cross_bound)``."""
    X = field.default_x_inf() if X_inf is None else float(X_inf)
    phi, _ = regular_pair(field, z, tol=tol, grid=solver_grid(field, X, zscale_for(z)))
    body = float(phi.grid.integrate(np.abs(phi.values) ** 2))
    coeffs = connect(field, z, tol=tol, X_inf=X) if coeffs is None else coeffs
    tail, cross = norm_tail(field, coeffs, X)
    return body + tail, tail, cross


def verify_lc2p(field: CoefficientField, z, X_inf=None, tol=CONNECT_TOL):
    """Both sides of ``|sigma_-|^2 - |sigma_+|^2 = Im z ||phi_z||^2`` and their gap."""
    z = complex(z)
    if z.imag == 0:
        return 0.0, 0.0, 0.0
    X = field.default_x_inf() if X_inf is None else float(X_inf)
    c = connect(field, z, tol=tol, X_inf=X)
    lhs = abs(c.sigma_minus) ** 2 - abs(c.sigma_plus) ** 2
    total, _, _ = phi_norm_squared(field, z, X, tol, c)
    rhs = z.imag * total
    return float(lhs), float(rhs), float(abs(lhs - rhs))
