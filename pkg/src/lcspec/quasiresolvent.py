"""The quasiresolvent ``R(z)`` of the maximal operator.

``R(z) h = theta_z int_0^x phi_z h + phi_z int_x^X theta_z h`` for every
complex ``z``.  Since ``conj(phi_zbar) = phi_z``, the pairing
``<h, phi_zbar>`` is the bilinear integral ``int h phi_z``; the same holds
for ``theta``.  Cumulative integrals use the panel rules of the shared
solver grid, which keeps the output on the nodes of ``phi_z``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .coefficients import CoefficientField
from .errors import AlignmentError
from .odecore import GridSolution, check_im_z, regular_pair, solver_grid, zscale_for
from .panels import PanelGrid

QRES_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Values of a function on the nodes of a solver grid."""

    nodes: np.ndarray
    values: np.ndarray
    grid: PanelGrid | None = dc_field(default=None, repr=False)

    def __post_init__(self):
        if self.values.shape != self.nodes.shape:
            raise ValueError("values must match the nodes")

    @classmethod
    def from_callable(cls, grid: PanelGrid, fn):
        return cls(grid.nodes, np.asarray(fn(grid.nodes), dtype=complex), grid)

    @classmethod
    def gaussian(cls, grid: PanelGrid, center=2.0, width=0.5, amplitude=1.0):
        return cls.from_callable(grid, lambda x: amplitude * np.exp(-(((x - center) / width) ** 2)))

    @classmethod
    def from_table(cls, grid: PanelGrid, x, values):
        """Linear interpolation of tabulated data; zero outside the table."""
        x = np.asarray(x, dtype=float)
        v = np.asarray(values, dtype=complex)
        re = np.interp(grid.nodes, x, v.real, left=0.0, right=0.0)
        im = np.interp(grid.nodes, x, v.imag, left=0.0, right=0.0)
        return cls(grid.nodes, re + 1j * im, grid)

    @classmethod
    def from_csv(cls, grid: PanelGrid, text):
        """Columns ``x, Re h, Im h`` with a header row."""
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        data = np.array([[float(v) for v in r] for r in rows[1:]])
        return cls.from_table(grid, data[:, 0], data[:, 1] + 1j * data[:, 2])

    def __add__(self, other):
        _same_nodes(self.nodes, other.nodes)
        return SampledFunction(self.nodes, self.values + other.values, self.grid)

    def scale(self, c):
        return SampledFunction(self.nodes, c * self.values, self.grid)

    def norm(self):
        return math.sqrt(float(self.grid.integrate(np.abs(self.values) ** 2)))


def _same_nodes(a, b):
    if a.shape != b.shape or not np.array_equal(a, b):
        raise AlignmentError("sampled objects live on different grids")


def inner(u, v, grid: PanelGrid):
    """``<u, v> = int u conj(v)`` over the grid."""
    u = getattr(u, "values", u)
    v = getattr(v, "values", v)
    return complex(grid.integrate(u * np.conj(v)))


def pairing(h, u, grid: PanelGrid):
    """Bilinear ``int h u`` (equals ``<h, conj u>``)."""
    h = getattr(h, "values", h)
    u = getattr(u, "values", u)
    return complex(grid.integrate(h * u))


def default_grid(field: CoefficientField, z=0.0, X_inf=None):
    X = field.default_x_inf() if X_inf is None else float(X_inf)
    return solver_grid(field, X, zscale_for(z))


def quasiresolvent_apply(field: CoefficientField, z, h: SampledFunction, tol=QRES_TOL, pair=None):
    """``u = R(z) h`` together with ``p u'``, on the grid of ``h``.

    ``pair`` may supply precomputed ``(phi_z, theta_z)`` on that grid.
    """
    z = check_im_z(z)
    grid = h.grid
    if grid is None:
        raise AlignmentError("h must carry its solver grid")
    phi, theta = regular_pair(field, z, tol=tol, grid=grid) if pair is None else pair
    _same_nodes(phi.nodes, h.nodes)
    left = grid.cumulative_left(phi.values * h.values)
    right = grid.cumulative_right(theta.values * h.values)
    u = theta.values * left + phi.values * right
    pu = theta.quasiderivs * left + phi.quasiderivs * right
    meta = {"operator": "quasiresolvent", "h_pair_phi": complex(left[-1]), "h_pair_theta": complex(right[0])}
    return GridSolution(grid.nodes, u, pu, z, meta, grid)


def apply_residual(field: CoefficientField, u: GridSolution, h: SampledFunction):
    """``(H - z) u - h`` on the nodes, from the sampled quasi-derivative."""
    _same_nodes(u.nodes, h.nodes)
    x = u.nodes
    dv = u.grid.derivative(u.quasiderivs)
    return -dv - (field.q(x) + u.z) * u.values - h.values


def residual_norm(field: CoefficientField, u: GridSolution, h: SampledFunction, relative=True):
    """``||(H - z) u - h||`` in L^2 on the grid, relative to ``||h||`` by default."""
    r = apply_residual(field, u, h)
    num = math.sqrt(float(u.grid.integrate(np.abs(r) ** 2)))
    return num / h.norm() if relative else num


def kernel(field: CoefficientField, z, grid: PanelGrid, tol=QRES_TOL, pair=None):
    """Kernel matrix of ``R(z)`` on the grid nodes."""
    phi, theta = regular_pair(field, z, tol=tol, grid=grid) if pair is None else pair
    x = grid.nodes
    lower = x[:, None] >= x[None, :]
    return np.where(lower, theta.values[:, None] * phi.values[None, :], phi.values[:, None] * theta.values[None, :])


def hilbert_schmidt_norm(field: CoefficientField, z, grid: PanelGrid, tol=QRES_TOL):
    """``(int int |K(x, y)|^2)^(1/2)`` by the product rule of the grid."""
    K = kernel(field, z, grid, tol)
    w = grid.weights
    return math.sqrt(float(np.einsum("i,ij,j->", w, np.abs(K) ** 2, w)))


# ---------------------------------------------------------------- boundary form
@dataclass(frozen=True)
class BoundaryFormResult:
    lhs: complex
    rhs: complex
    gap: float
    fit_residual: float
    uncertainty: float
    converged: bool


def boundary_wronskian(u: GridSolution, v: GridSolution):
    """``p (u conj(v)' - u' conj(v))`` at every node."""
    _same_nodes(u.nodes, v.nodes)
    return u.values * np.conj(v.quasiderivs) - u.quasiderivs * np.conj(v.values)


def _drift_basis(kappa, A):
    """``(exp(c A) - 1) / c`` for ``c = +-i kappa / 2`` (``A`` when ``kappa = 0``)."""
    c = 0.5j * kappa
    if abs(c) * float(np.max(A)) < 1e-8:
        return [A + 0j]
    return [np.expm1(c * A) / c, np.expm1(-c * A) / -c]


def boundary_limit(field: CoefficientField, u: GridSolution, v: GridSolution, start=None):
    """Limit of :func:`boundary_wronskian` at infinity.

    Beyond the support of ``(H - z) u`` and ``(H - z) v`` the form obeys
    ``W' = (z_u - conj z_v) u vbar``.  With ``A(x) = int_x^inf a^2`` the
    smooth part of ``u vbar`` is ``a^2`` times a combination of
    ``exp(+-i kappa A / 2)``, ``kappa = z_u - conj z_v``, and the rest
    oscillates like ``e^{+-i (2 Xi - D - mu A / 2)}`` with ``D = int_x^inf a (p a')'``
    and ``mu = z_u + conj z_v``.  Integrating gives the fit basis
    ``1, (exp(+-i kappa A / 2) - 1) / (+-i kappa / 2)`` and ``a^2 / xi`` times
    the two oscillations on ``[start, X]``; the constant is the limit.  Returns ``(limit, fit_residual)``.
    """
    w = boundary_wronskian(u, v)
    x = u.nodes
    X = x[-1]
    start = max(field.x0, 0.5 * X) if start is None else start
    m = x >= start
    xm = x[m]
    if field.analytic:
        A, D = field.weight_tail(xm), field.drift_tail(xm)
    else:
        xs = np.maximum(x, field.x0)
        A = u.grid.cumulative_right(field.weight(xs))[m]
        D = u.grid.cumulative_right(field.drift(xs))[m]
    kappa = complex(u.z) - np.conj(complex(v.z))
    mu = complex(u.z) + np.conj(complex(v.z))
    slow = 2.0 * (field.phase(xm) - field.phase(X)) - D - 0.5 * mu * A
    osc = field.weight(xm) / field.xi(xm) * np.exp(1j * slow)
    cols = [np.ones_like(A, dtype=complex)] + _drift_basis(kappa, A) + [osc, field.weight(xm) / field.xi(xm) * np.exp(-1j * np.conj(slow))]
    B = np.column_stack(cols)
    col = np.max(np.abs(B), axis=0)
    coef, *_ = np.linalg.lstsq(B / col, w[m], rcond=None)
    fit = (B / col) @ coef
    scale = max(float(np.max(np.abs(w[m]))), 1e-300)
    return complex(coef[0] / col[0]), float(np.max(np.abs(fit - w[m])) / scale)


def boundary_form(field: CoefficientField, u: GridSolution, v: GridSolution, s_of, rel_limit=1e-5):
    """Both sides of the Green identity at infinity.

    ``lhs = lim p (u vbar' - u' vbar)``; ``rhs = -2i (s_+(u) conj s_+(v) - s_-(u) conj s_-(v))``
    with ``s_of(w)`` returning ``(s_+, s_-)`` for ``w`` in ``(u, v)``.  The
    limit is extrapolated from two windows; their disagreement is the
    reported ``uncertainty`` and ``converged`` is False when it exceeds
    ``rel_limit`` relative to the size of the form.
    """
    X = u.nodes[-1]
    lhs, res = boundary_limit(field, u, v)
    alt, _ = boundary_limit(field, u, v, start=max(field.x0, 0.75 * X))
    su, sv = s_of(u), s_of(v)
    rhs = -2j * (su[0] * np.conj(sv[0]) - su[1] * np.conj(sv[1]))
    size = max(abs(su[0] * sv[0]) + abs(su[1] * sv[1]), 1e-300)
    unc = abs(lhs - alt)
    return BoundaryFormResult(complex(lhs), complex(rhs), float(abs(lhs - rhs)), res, float(unc), unc <= rel_limit * size)
