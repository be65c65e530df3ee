"""Self-adjoint realisations ``H_omega`` fixed by ``s_+(u) = omega s_-(u)``.

Boundary functionals, the eigenvalue problem, the resolvent and the
spectral transform of ``H_omega``, and the parametrisation of ``omega`` by
a real ``t``.  On the real axis ``sigma_-(lam) = conj(sigma_+(lam))``, so
with ``omega = e^{i alpha}`` the eigenvalue condition
``sigma_+ - omega sigma_- = 0`` is equivalent to the real equation
``Im(e^{-i alpha / 2} sigma_+(lam)) = 0``, which is what the scan brackets.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.optimize import brentq

from .coefficients import CoefficientField
from .connection import CONNECT_TOL, ConnectionCoefficients, connect, phi_norm_squared
from .errors import EigenvalueProximityError, RescanError, WindowError
from .jost import _assemble, tail_data, wkb_rate
from .odecore import GridSolution, panel_propagators, regular_inits, regular_pair, solver_grid, zscale_for
from .quasiresolvent import SampledFunction, inner, pairing, quasiresolvent_apply

UNIT_TOL = 1e-12
PROXIMITY = 1e-6
FIT_WINDOW = 4 * math.pi


@dataclass(frozen=True)
class ExtensionPoint:
    omega: complex

    def __post_init__(self):
        if abs(abs(self.omega) - 1.0) > UNIT_TOL:
            raise ValueError(f"|omega| = {abs(self.omega)!r} is not 1")

    @classmethod
    def from_angle(cls, alpha):
        return cls(cmath.exp(1j * alpha))

    @classmethod
    def parse(cls, text):
        """Accepts ``"1+0i"``, ``"-1"``, ``"0+1i"`` (``i`` or ``j``)."""
        w = complex(str(text).strip().replace(" ", "").replace("i", "j"))
        return cls(w / abs(w) if abs(abs(w) - 1.0) <= UNIT_TOL else w)

    @property
    def angle(self):
        return cmath.phase(self.omega)


def _as_omega(omega):
    if isinstance(omega, ExtensionPoint):
        return omega
    return ExtensionPoint(complex(omega))


@dataclass(frozen=True)
class BoundaryData:
    s_plus: complex
    s_minus: complex
    method: str
    z_ref: complex | None = None
    fit_residual: float = 0.0

    def condition_residual(self, omega):
        """``|s_+ - omega s_-| / (|s_+| + |s_-|)``."""
        w = _as_omega(omega).omega
        den = abs(self.s_plus) + abs(self.s_minus)
        return abs(self.s_plus - w * self.s_minus) / den if den > 0 else 0.0


@dataclass
class EigenReport:
    omega: complex
    interval: tuple
    lambdas: list = dc_field(default_factory=list)
    phase_residuals: list = dc_field(default_factory=list)
    ode_residuals: list = dc_field(default_factory=list)
    bc_residuals: list = dc_field(default_factory=list)
    bracket_log: dict = dc_field(default_factory=dict)

    def to_dict(self):
        return {
            "omega": {"re": self.omega.real, "im": self.omega.imag},
            "interval": [float(self.interval[0]), float(self.interval[1])],
            "eigenvalues": [
                {"lambda": lam, "phase_residual": pr, "ode_residual": orr, "bc_residual": br}
                for lam, pr, orr, br in zip(self.lambdas, self.phase_residuals, self.ode_residuals, self.bc_residuals)
            ],
            "scan": self.bracket_log,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


# ------------------------------------------------------------ boundary values
def s_functionals(field: CoefficientField, gamma, z_ref, h: SampledFunction | None = None, X_inf=None,
                  tol=CONNECT_TOL, pair_tail=0j):
    """``s_pm`` of ``u = gamma phi_z + R(z) h`` at ``z = z_ref``.

    ``pair_tail`` is added to ``<h, phi_zbar>`` for ``h`` that is not
    negligible beyond the grid (see :func:`representation`).
    """
    c = connect(field, z_ref, tol=tol, X_inf=X_inf)
    ph = 0j
    if h is not None:
        phi, _ = regular_pair(field, z_ref, tol=tol, grid=h.grid)
        ph = pairing(h, phi, h.grid)
    ph += complex(pair_tail)
    gamma = complex(gamma)
    return BoundaryData(
        gamma * c.sigma_plus + ph * c.tau_plus, gamma * c.sigma_minus + ph * c.tau_minus, "analytic", complex(z_ref)
    )


def representation(field: CoefficientField, u: GridSolution, z, tol=CONNECT_TOL):
    """``(gamma, h, pair_tail)`` with ``u = gamma phi_z + R(z) h`` and ``h = (H - z) u``.

    When ``u`` solves ``(H - u.z) u = 0`` far out, ``h = (u.z - z) u`` there and
    the pairings of ``h`` with ``phi_z``, ``theta_z`` beyond the grid are not
    negligible.  With ``kappa = u.z - z`` the products ``f_{u.z} conj f_zbar`` and
    ``conj f_{conj u.z} f_z`` behave like ``a^2 exp(-+ i kappa A / 2)``, so the
    non-oscillating tail is ``kappa (s_+ c_- E_- + s_- c_+ E_+)`` with
    ``E_-+ = int_0^A exp(-+ i kappa t / 2) dt``, ``s_pm`` fitted from ``u`` and
    ``c_pm`` the coefficients of ``phi_z`` or ``theta_z``.  The ``theta`` part is
    folded into ``gamma``; the ``phi`` part is returned as ``pair_tail``.
    """
    z = complex(z)
    grid = u.grid
    x = u.nodes
    hv = -grid.derivative(u.quasiderivs) - (field.q(x) + z) * u.values
    h = SampledFunction(x, hv, grid)
    pair = regular_pair(field, z, tol=tol, grid=grid)
    r = quasiresolvent_apply(field, z, h, tol, pair=pair)
    theta = pair[1]
    d, dq = u.values[0] - r.values[0], u.quasiderivs[0] - r.quasiderivs[0]
    gamma = dq * theta.values[0] - d * theta.quasiderivs[0]
    tail_phi = tail_theta = 0j
    kappa = complex(u.z) - z
    if kappa != 0 and field.analytic:
        b = s_fit(field, u)
        c = connect(field, z, tol=tol, X_inf=grid.end)
        A = float(field.weight_tail(grid.end))
        em = np.expm1(-0.5j * kappa * A) / (-0.5j)
        ep = np.expm1(0.5j * kappa * A) / (0.5j)
        tail_phi = b.s_plus * c.sigma_minus * em + b.s_minus * c.sigma_plus * ep
        tail_theta = b.s_plus * c.tau_minus * em + b.s_minus * c.tau_plus * ep
    # R(z) h(0) = phi_z(0) <h, theta_zbar> and {phi_z, theta_z} = 1
    return complex(gamma - tail_theta), h, complex(tail_phi)


def _tail_psi(field, z, x):
    """Tail-model ``psi_z`` on far nodes ``x`` (last entry is ``X``)."""
    X = x[-1]
    psi_X, _ = tail_data(field, z, X, "wkb" if field.analytic else "none")
    if not field.analytic:
        return np.full(x.shape, psi_X, dtype=complex), np.zeros(x.shape, dtype=complex)
    rate = wkb_rate(field, z, x)
    # w(x) = w(X) - int_x^X w'; trapezoid is plenty for this slowly varying phase
    seg = 0.5 * (rate[1:] + rate[:-1]) * np.diff(x)
    acc = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    psi = psi_X * np.exp(-acc)
    return psi, rate * psi


def s_fit(field: CoefficientField, u: GridSolution, window=FIT_WINDOW, z_basis=None):
    """Fit ``u = s_+ f_z + s_- conj f_zbar`` over the last ``window`` of phase.

    The two columns are the tail-model Jost solutions (both ``u`` and
    ``p u'`` rows enter the least squares).  With the plain ansatz
    ``a e^{+-i Xi}`` the o(1) term would dominate the fit error.
    """
    z = complex(u.z if z_basis is None else z_basis)
    x = u.nodes
    X = x[-1]
    Xi_end = float(field.phase(X))
    if X <= field.x0 or Xi_end - float(field.phase(field.x0)) < window:
        raise WindowError("fewer than two oscillations available for the fit")
    m = (x >= field.x0) & (field.phase(np.maximum(x, field.x0)) >= Xi_end - window)
    if np.count_nonzero(m) < 8:
        raise WindowError("fit window holds too few nodes")
    xm = x[m]
    psi_p, dpsi_p = _tail_psi(field, z, xm)
    psi_m, dpsi_m = _tail_psi(field, z.conjugate(), xm)
    fp, pfp = _assemble(field, xm, psi_p, dpsi_p)
    fm, pfm = _assemble(field, xm, psi_m, dpsi_m)
    fm, pfm = np.conj(fm), np.conj(pfm)
    a = field.amplitude(xm)
    sq = field.p(xm) * a * field.xi(xm)
    B = np.concatenate([np.column_stack([fp, fm]) / a[:, None], np.column_stack([pfp, pfm]) / sq[:, None]])
    rhs = np.concatenate([u.values[m] / a, u.quasiderivs[m] / sq])
    coef, *_ = np.linalg.lstsq(B, rhs, rcond=None)
    res = float(np.linalg.norm(B @ coef - rhs) / max(np.linalg.norm(rhs), 1e-300))
    return BoundaryData(complex(coef[0]), complex(coef[1]), "asymptotic_fit", z, res)


# ----------------------------------------------------------------- eigenvalues
def _end_transfer(field, grid, lam):
    Y = panel_propagators(field, grid, float(lam))[0]
    T = np.eye(2)
    for i in range(Y.shape[0]):
        T = Y[i, -1] @ T
    return T


def sigma_plus_real(field: CoefficientField, lam, X_inf=None, grid=None):
    """``sigma_+(lam)`` for real ``lam`` from ``phi`` at ``X_inf`` and the tail-model ``f``."""
    X = field.default_x_inf() if X_inf is None else float(X_inf)
    grid = solver_grid(field, X, zscale_for(lam)) if grid is None else grid
    (a0, a1), _ = regular_inits(field)
    phiX = _end_transfer(field, grid, lam) @ np.array([a0, a1])
    psi, dpsi = tail_data(field, lam, X, "wkb" if field.analytic else "none")
    f, pf = _assemble(field, np.array([X]), np.array([psi]), np.array([dpsi]))
    fb, pfb = np.conj(f[0]), np.conj(pf[0])
    return complex((phiX[1] * fb - phiX[0] * pfb) / 2j)


def _phase_scan(g, lo, hi, n0, max_points):
    """Adaptive sampling of ``g`` (complex) until successive phases differ by < pi/2."""
    lams = list(np.linspace(lo, hi, n0))
    vals = [g(t) for t in lams]
    while True:
        ph = np.angle(np.asarray(vals))
        jumps = np.abs(np.angle(np.exp(1j * np.diff(ph))))
        bad = np.nonzero(jumps > 0.5 * math.pi)[0]
        if bad.size == 0:
            return np.asarray(lams), np.asarray(vals)
        if len(lams) + bad.size > max_points:
            raise RescanError(
                f"phase of sigma_+ moves too fast for {max_points} scan points", suggested_points=2 * len(lams)
            )
        for i in bad[::-1]:
            mid = 0.5 * (lams[i] + lams[i + 1])
            lams.insert(i + 1, mid)
            vals.insert(i + 1, g(mid))


def eigenvalues(field: CoefficientField, omega, interval, tol=1e-12, n_scan=64, max_points=20000,
                X_inf=None, validate=True):
    """Eigenvalues of ``H_omega`` in ``interval``."""
    om = _as_omega(omega)
    lo, hi = float(interval[0]), float(interval[1])
    if not lo < hi:
        raise ValueError("interval must satisfy lo < hi")
    X = field.default_x_inf() if X_inf is None else float(X_inf)
    rot = cmath.exp(-0.5j * om.angle)

    def g(lam):
        return rot * sigma_plus_real(field, lam, X)

    lams, vals = _phase_scan(g, lo, hi, n_scan, max_points)
    s = vals.imag
    roots = []
    for i in range(len(lams) - 1):
        if s[i] == 0.0:
            roots.append(float(lams[i]))
        elif s[i] * s[i + 1] < 0:
            roots.append(brentq(lambda t: g(t).imag, lams[i], lams[i + 1], xtol=tol * max(1.0, abs(lams[i])),
                                rtol=4 * np.finfo(float).eps, maxiter=200))
    if s[-1] == 0.0:
        roots.append(float(lams[-1]))
    report = EigenReport(om.omega, (lo, hi), bracket_log={
        "points": int(len(lams)), "unwrapped_phase_change": float(np.sum(np.diff(np.unwrap(np.angle(vals))))),
    })
    for lam in roots:
        c = connect(field, lam, X_inf=X)
        report.lambdas.append(float(lam))
        report.phase_residuals.append(float(abs(c.sigma_plus - om.omega * c.sigma_minus)))
        if validate:
            phi, _ = regular_pair(field, lam, grid=solver_grid(field, X, zscale_for(lam)))
            report.ode_residuals.append(eigen_residual(field, phi))
            report.bc_residuals.append(s_fit(field, phi).condition_residual(om))
        else:
            report.ode_residuals.append(math.nan)
            report.bc_residuals.append(math.nan)
    return report


def eigen_residual(field: CoefficientField, sol: GridSolution):
    """Relative L^2 size of ``-(p u')' - (q + z) u`` with ``(p u')'`` from spectral differentiation.

    ``u'`` is likewise checked against ``(p u') / p``; both are scaled by
    ``|q| + |z| + 1`` so the two terms are commensurate.
    """
    g = sol.grid
    x = sol.nodes
    w = np.abs(field.q(x)) + abs(sol.z) + 1.0
    r1 = -g.derivative(sol.quasiderivs) - (field.q(x) + sol.z) * sol.values
    r2 = g.derivative(sol.values) - sol.quasiderivs / field.p(x)
    num = g.integrate(np.abs(r1) ** 2 + np.abs(r2) ** 2 * w)
    den = g.integrate(np.abs(w * sol.values) ** 2 + np.abs(sol.quasiderivs) ** 2 * w)
    return float(math.sqrt(num / den))


def normalized_eigenfunction(field: CoefficientField, lam, X_inf=None):
    """``phi_lam / ||phi_lam||`` with the tail-corrected norm."""
    X = field.default_x_inf() if X_inf is None else float(X_inf)
    phi, _ = regular_pair(field, lam, grid=solver_grid(field, X, zscale_for(lam)))
    total, _, _ = phi_norm_squared(field, lam, X)
    return phi.scale(1.0 / math.sqrt(total)), total


# --------------------------------------------------------- resolvent & friends
def gamma_omega(coeffs: ConnectionCoefficients, omega, threshold=PROXIMITY):
    """``-(tau_+ - omega tau_-) / (sigma_+ - omega sigma_-)``."""
    w = _as_omega(omega).omega
    den = coeffs.sigma_plus - w * coeffs.sigma_minus
    if abs(den) < threshold * (abs(coeffs.sigma_plus) + abs(coeffs.sigma_minus)):
        raise EigenvalueProximityError(
            f"sigma_+ - omega sigma_- = {abs(den):.3e} at z = {coeffs.z}: spectral point nearby",
            estimate=complex(coeffs.z).real,
        )
    return complex(-(coeffs.tau_plus - w * coeffs.tau_minus) / den)


def resolvent_apply(field: CoefficientField, omega, z, h: SampledFunction, tol=CONNECT_TOL, X_inf=None):
    """``R_omega(z) h = gamma_omega(z) <h, phi_zbar> phi_z + R(z) h``."""
    z = complex(z)
    c = connect(field, z, tol=tol, X_inf=X_inf)
    gam = gamma_omega(c, omega)
    pair = regular_pair(field, z, tol=tol, grid=h.grid)
    phi = pair[0]
    ph = pairing(h, phi, h.grid)
    r = quasiresolvent_apply(field, z, h, tol, pair=pair)
    out = phi.scale(gam * ph) + r
    meta = {"operator": "resolvent", "omega": _as_omega(omega).omega, "gamma": gam, "h_pair_phi": ph}
    return GridSolution(out.nodes, out.values, out.quasiderivs, z, meta, out.grid)


def resolvent_boundary_data(field: CoefficientField, omega, z, h: SampledFunction, tol=CONNECT_TOL, X_inf=None):
    """Analytic ``s_pm`` of ``R_omega(z) h`` (``gamma = gamma_omega <h, phi_zbar>``)."""
    c = connect(field, z, tol=tol, X_inf=X_inf)
    phi, _ = regular_pair(field, z, tol=tol, grid=h.grid)
    ph = pairing(h, phi, h.grid)
    return s_functionals(field, gamma_omega(c, omega) * ph, z, h, X_inf, tol)


def spectral_transform(field: CoefficientField, omega, z, h: SampledFunction, tol=CONNECT_TOL, X_inf=None):
    """``F(z) = <R_omega(z) h, h> = gamma_omega(z) <h, phi_zbar> <phi_z, h> + <R(z) h, h>``.

    For real ``z`` the product of pairings is ``|<phi_z, h>|^2``.
    """
    z = complex(z)
    c = connect(field, z, tol=tol, X_inf=X_inf)
    gam = gamma_omega(c, omega)
    pair = regular_pair(field, z, tol=tol, grid=h.grid)
    phi = pair[0]
    r = quasiresolvent_apply(field, z, h, tol, pair=pair)
    return complex(gam * pairing(h, phi, h.grid) * inner(phi, h, h.grid) + inner(r, h, h.grid))


def eigen_expansion(field: CoefficientField, z, h: SampledFunction, lambdas, window=None, X_inf=None):
    """Partial sum ``sum_k |<h, psi_k>|^2 / (lam_k - z)`` and the out-of-window bound.

    ``lambdas`` must be all eigenvalues inside ``window`` (default: their
    span).  The bound is ``(||h||^2 - sum_k |<h, psi_k>|^2) / dist(z, R \\ window)``.
    Returns ``(partial_sum, bound, captured_mass)``.
    """
    z = complex(z)
    total = 0j
    captured = 0.0
    for lam in lambdas:
        psi, _ = normalized_eigenfunction(field, lam, X_inf)
        grid = h.grid
        if psi.grid != grid:
            psi = _resample(psi, grid)
        c2 = abs(inner(h, psi, grid)) ** 2
        captured += c2
        total += c2 / (lam - z)
    lo, hi = (min(lambdas), max(lambdas)) if window is None else window
    dist = abs(z.imag)
    if lo < z.real < hi:
        dist = math.hypot(min(z.real - lo, hi - z.real), z.imag)
    rest = max(h.norm() ** 2 - captured, 0.0)
    return complex(total), rest / dist, captured


def _resample(sol: GridSolution, grid):
    re = np.interp(grid.nodes, sol.nodes, sol.values.real)
    im = np.interp(grid.nodes, sol.nodes, sol.values.imag)
    return GridSolution(grid.nodes, re + 1j * im, np.zeros(len(grid), dtype=complex), sol.z, {}, grid)


# ------------------------------------------------------------- von Neumann link
def omega_from_t(t, coeffs0: ConnectionCoefficients):
    """``omega = (t sigma_+(0) + tau_+(0)) / (t sigma_-(0) + tau_-(0))``; ``t = inf`` gives ``sigma_+/sigma_-``."""
    c = coeffs0
    if math.isinf(t):
        num, den = c.sigma_plus, c.sigma_minus
    else:
        num, den = t * c.sigma_plus + c.tau_plus, t * c.sigma_minus + c.tau_minus
    if abs(den) == 0.0:
        raise ZeroDivisionError("vanishing denominator: the extension is the limit omega = tau_+(0)/tau_-(0)")
    return ExtensionPoint(complex(num / den))


def t_from_omega(omega, coeffs0: ConnectionCoefficients):
    """Inverse Moebius map; ``inf`` when ``omega = sigma_+(0) / sigma_-(0)``."""
    c = coeffs0
    w = _as_omega(omega).omega
    den = w * c.sigma_minus - c.sigma_plus
    num = c.tau_plus - w * c.tau_minus
    if abs(den) <= 1e-15 * (abs(c.sigma_plus) + abs(c.sigma_minus)):
        return math.inf
    return float((num / den).real)
