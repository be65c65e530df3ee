"""Integration of ``-(p u')' - q u = z u`` as a quasi-derivative system.

The state is ``(u, p u')``; with ``v = p u'`` the system reads

    u' = v / p,        v' = -(q + z) u.

Each panel of a :class:`~lcspec.panels.PanelGrid` is solved by Chebyshev
collocation of the integral form of the system, giving the fundamental
matrix at every node of the panel.  Solutions are then chained panel to
panel, forwards or backwards.  Panel widths are capped at ``1/(2 pi)`` of
the local wavelength (well inside the 1/8 requirement for phase
resolution) and refined wherever the trailing Chebyshev coefficients
exceed the tolerance.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .coefficients import CoefficientField
from .errors import AlignmentError, DomainError, IntegrationError, SolutionOverflowError
from .panels import DEFAULT_ORDER, PanelGrid, chebyshev_tail

OVERFLOW = 1e250
MAX_PANELS = 2_000_000
# Phase advance allowed per panel (radians of the local wavenumber).
PANEL_PHASE = 1.0
# Panels never exceed this fraction of their distance from the origin
# (plus an offset), so power-law amplitudes stay resolved.
PANEL_REL = 0.25


@dataclass(frozen=True, eq=False)
class GridSolution:
    """A sampled solution: ``u`` and ``p u'`` on strictly increasing nodes."""

    nodes: np.ndarray
    values: np.ndarray
    quasiderivs: np.ndarray
    z: complex
    meta: dict = dc_field(default_factory=dict)
    grid: PanelGrid | None = dc_field(default=None, repr=False)

    def __post_init__(self):
        if self.nodes.ndim != 1 or np.any(np.diff(self.nodes) <= 0):
            raise ValueError("nodes must be strictly increasing")
        if self.values.shape != self.nodes.shape or self.quasiderivs.shape != self.nodes.shape:
            raise ValueError("values and quasiderivs must match the nodes")

    def __len__(self):
        return self.nodes.size

    def conj(self):
        return GridSolution(
            self.nodes, np.conj(self.values), np.conj(self.quasiderivs), np.conj(self.z), dict(self.meta), self.grid
        )

    def scale(self, c):
        return GridSolution(self.nodes, c * self.values, c * self.quasiderivs, self.z, dict(self.meta), self.grid)

    def __add__(self, other):
        _check_aligned(self, other)
        return GridSolution(
            self.nodes, self.values + other.values, self.quasiderivs + other.quasiderivs, self.z, {}, self.grid
        )

    def restrict(self, lo, hi):
        """The part of the solution between two panel edges of its grid."""
        if self.grid is None:
            mask = (self.nodes >= lo) & (self.nodes <= hi)
            return GridSolution(self.nodes[mask], self.values[mask], self.quasiderivs[mask], self.z, dict(self.meta))
        sub, off = self.grid.subgrid(lo, hi)
        sl = slice(off, off + len(sub))
        return GridSolution(self.nodes[sl], self.values[sl], self.quasiderivs[sl], self.z, dict(self.meta), sub)

    def at(self, x):
        """``(u, p u')`` at the node closest to ``x``."""
        i = int(np.argmin(np.abs(self.nodes - x)))
        return self.values[i], self.quasiderivs[i]

    def to_csv(self, fh=None):
        """Columns ``x, Re u, Im u, Re pu', Im pu'``; returns the text if ``fh`` is None."""
        rows = np.column_stack(
            [self.nodes, self.values.real, self.values.imag, self.quasiderivs.real, self.quasiderivs.imag]
        )
        from .cli import write_csv

        return write_csv(["x", "re_u", "im_u", "re_pu", "im_pu"], rows, fh)

    @classmethod
    def from_csv(cls, text, z=0j):
        reader = csv.reader(io.StringIO(text))
        next(reader)
        data = np.array([[float(v) for v in row] for row in reader if row])
        return cls(data[:, 0], data[:, 1] + 1j * data[:, 2], data[:, 3] + 1j * data[:, 4], complex(z))


def _check_aligned(u, v):
    if u.nodes.shape != v.nodes.shape or not np.array_equal(u.nodes, v.nodes):
        raise AlignmentError("solutions do not share a grid")


# ---------------------------------------------------------------------- grids
def panel_edges(field: CoefficientField, lo, hi, zscale=0.0, phase=PANEL_PHASE, rel=PANEL_REL):
    """Panel edges on ``[lo, hi]`` with at most ``phase`` radians per panel."""
    edges = [float(lo)]
    x = float(lo)
    offset = 0.25
    while x < hi:
        k0 = float(field.xi_eff(x, zscale))
        w = phase / k0 if k0 > 0 else hi - x
        k1 = float(field.xi_eff(min(x + w, hi), zscale))
        w = min(w, phase / k1 if k1 > 0 else w, rel * (x + offset))
        if hi - x <= 1.05 * w:
            x = float(hi)
        else:
            x += w
        edges.append(x)
        if len(edges) > MAX_PANELS:
            raise IntegrationError("panel count exceeded; oscillation too fast for the span", last_node=x)
    return np.asarray(edges)


# High-level drivers refuse |Im z| above this: regular solutions grow like
# exp(|Im z| * travel time) and the Wronskians lose all accuracy.
MAX_IM_Z = 10.0


def check_im_z(z, limit=MAX_IM_Z):
    if abs(complex(z).imag) > limit:
        raise DomainError(f"|Im z| = {abs(complex(z).imag):g} exceeds {limit:g}")
    return complex(z)


def zscale_for(z):
    """Quantised |z| used for grid layout, so nearby z share one grid."""
    r = abs(complex(z))
    return float(max(64.0, 2.0 ** math.ceil(math.log2(r)))) if r > 0 else 64.0


@lru_cache(maxsize=64)
def solver_grid(field: CoefficientField, x_end: float, zscale: float = 64.0, n: int = DEFAULT_ORDER):
    """Shared grid on ``[0, x_end]`` with ``x0`` as a panel edge."""
    x0 = field.x0
    if x_end <= x0:
        return PanelGrid(panel_edges(field, 0.0, x_end, zscale), n)
    left = panel_edges(field, 0.0, x0, zscale) if x0 > 0 else np.array([0.0])
    right = panel_edges(field, x0, x_end, zscale)
    return PanelGrid(np.concatenate([left, right[1:]]), n)


# ----------------------------------------------------------------- propagators
def panel_propagators(field: CoefficientField, grid: PanelGrid, z):
    """Fundamental matrices on every panel.

    Returns ``Y`` with shape ``(m, P, n, 2, 2)`` for ``m`` spectral
    parameters: ``Y[k, i, j] @ (u, pu')(left edge) = (u, pu')(node j)``.
    """
    zs = np.atleast_1d(np.asarray(z))
    real = np.isrealobj(zs) or np.all(np.imag(zs) == 0)
    dtype = float if real else complex
    zs = zs.real.astype(float) if real else zs.astype(complex)

    xp = grid.panel_nodes()
    n = grid.n
    _, L, _, _, _ = _ref(n)
    h = grid.half[:, None, None]
    A = h * L[None] / field.p(xp)[:, None, :]
    q = field.q(xp)
    ones = np.ones(n)
    out = np.empty((zs.size, grid.npanels, n, 2, 2), dtype=dtype)
    for k, zk in enumerate(zs):
        Bm = h * L[None] * (q + zk)[:, None, :]
        M = np.eye(n)[None] + A @ Bm
        rhs = np.stack([np.broadcast_to(ones, (grid.npanels, n)), A @ ones], axis=-1)
        U = np.linalg.solve(M, rhs)
        V = np.stack([np.zeros((grid.npanels, n)), np.ones((grid.npanels, n))], axis=-1) - Bm @ U
        out[k, :, :, 0, :] = U
        out[k, :, :, 1, :] = V
    return out


@lru_cache(maxsize=2)
def _ref(n):
    from .panels import reference_panel

    return reference_panel(n)


def propagation_error(Y):
    """Per-panel trailing Chebyshev coefficient of the fundamental matrices."""
    m, P, n = Y.shape[:3]
    fp = np.moveaxis(Y, 0, 2).reshape(P, n, -1)
    return chebyshev_tail(fp)


def chain(Y, init, start_right=False):
    """Chain panel fundamental matrices into node values.

    ``Y`` is ``(P, n, 2, 2)``; ``init`` is ``(2, r)`` and sits at the left
    edge (or right edge when ``start_right``).  Returns ``(P, n, 2, r)``.
    """
    P = Y.shape[0]
    init = np.asarray(init)
    dtype = np.result_type(Y.dtype, init.dtype)
    left_states = np.empty((P, 2, init.shape[1]), dtype=dtype)
    s = init.astype(dtype)
    if not start_right:
        for i in range(P):
            left_states[i] = s
            s = Y[i, -1] @ s
            if not np.all(np.abs(s) < OVERFLOW):
                raise SolutionOverflowError(
                    "solution overflow; reduce |Im z| or rescale", last_node=i
                )
    else:
        for i in range(P - 1, -1, -1):
            s = np.linalg.solve(Y[i, -1], s)
            left_states[i] = s
            if not np.all(np.abs(s) < OVERFLOW):
                raise SolutionOverflowError(
                    "solution overflow; reduce |Im z| or rescale", last_node=i
                )
    return np.einsum("pjab,pbr->pjar", Y, left_states)


def flatten(grid: PanelGrid, panel_values):
    """``(P, n, ...)`` panel data to unique-node data."""
    out = np.empty((len(grid),) + panel_values.shape[2:], dtype=panel_values.dtype)
    out[grid.index] = panel_values
    return out


def solve_on_grid(field, grid, z, inits, start_right=False):
    """Node values ``(N, 2, r)`` of the solutions with initial data ``inits``."""
    Y = panel_propagators(field, grid, z)[0]
    return flatten(grid, chain(Y, inits, start_right)), propagation_error(Y[None])


def _refine(field, grid, z, tol, max_rounds=6):
    edges = grid.edges
    for _ in range(max_rounds):
        g = PanelGrid(edges, grid.n)
        err = propagation_error(panel_propagators(field, g, z))
        bad = np.nonzero(err > tol)[0]
        if bad.size == 0:
            return g, err
        mids = 0.5 * (edges[bad] + edges[bad + 1])
        edges = np.sort(np.concatenate([edges, mids]))
    g = PanelGrid(edges, grid.n)
    return g, propagation_error(panel_propagators(field, g, z))


# ------------------------------------------------------------------ operations
def integrate(field: CoefficientField, z, span, init, tol=1e-10, grid: PanelGrid | None = None):
    """Solve from ``span[0]`` to ``span[1]`` (either direction) with ``(u, pu')`` = ``init``."""
    x_start, x_end = float(span[0]), float(span[1])
    if min(x_start, x_end) < 0:
        raise ValueError("span endpoints must be non-negative")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if x_start == x_end:
        raise ValueError("empty span")
    lo, hi = sorted((x_start, x_end))
    z = complex(z)
    if grid is None:
        grid = PanelGrid(panel_edges(field, lo, hi, zscale_for(z)))
        grid, err = _refine(field, grid, z, tol)
    elif not (np.isclose(grid.start, lo) and np.isclose(grid.end, hi)):
        raise AlignmentError("grid does not span the integration interval")
    else:
        err = None
    zz = z.real if z.imag == 0 else z
    vals, err_fixed = solve_on_grid(field, grid, zz, np.asarray(init).reshape(2, 1), start_right=x_start > x_end)
    err = err_fixed if err is None else err
    meta = {
        "tol": tol,
        "panels": grid.npanels,
        "nodes": len(grid),
        "max_local_error": float(np.max(err)),
        "direction": "backward" if x_start > x_end else "forward",
    }
    u = vals[:, 0, 0].astype(complex)
    pu = vals[:, 1, 0].astype(complex)
    return GridSolution(grid.nodes.copy(), u, pu, z, meta, grid)


def regular_inits(field: CoefficientField):
    """Initial data ``(u, pu')`` at 0 for ``phi`` and ``theta``."""
    p0 = float(field.p(0.0))
    if field.dirichlet:
        return (0.0, p0), (1.0 / p0, 0.0)
    return (1.0, p0 * field.alpha), (0.0, -1.0)


def regular_pair(field: CoefficientField, z, x_end=None, tol=1e-10, grid: PanelGrid | None = None):
    """``phi_z`` and ``theta_z`` on a shared grid over ``[0, x_end]``."""
    z = complex(z)
    if grid is None:
        x_end = field.default_x_inf() if x_end is None else float(x_end)
        if x_end <= 0:
            raise ValueError("x_end must be positive")
        grid = solver_grid(field, x_end, zscale_for(z))
    (a0, a1), (b0, b1) = regular_inits(field)
    inits = np.array([[a0, b0], [a1, b1]], dtype=float)
    zz = z.real if z.imag == 0 else z
    vals, err = solve_on_grid(field, grid, zz, inits)
    meta = {"tol": tol, "panels": grid.npanels, "nodes": len(grid), "max_local_error": float(np.max(err))}
    phi = GridSolution(grid.nodes, vals[:, 0, 0].astype(complex), vals[:, 1, 0].astype(complex), z, dict(meta), grid)
    theta = GridSolution(grid.nodes, vals[:, 0, 1].astype(complex), vals[:, 1, 1].astype(complex), z, dict(meta), grid)
    return phi, theta


def wronskian(u: GridSolution, v: GridSolution, x=None):
    """``{u, v} = (p u') v - u (p v')``; at the node nearest ``x`` or at every node."""
    _check_aligned(u, v)
    w = u.quasiderivs * v.values - u.values * v.quasiderivs
    if x is None:
        return w
    return w[int(np.argmin(np.abs(u.nodes - x)))]


def wronskian_spread(u: GridSolution, v: GridSolution):
    """Max deviation of the Wronskian from its median across nodes."""
    w = wronskian(u, v)
    med = np.median(w.real) + 1j * np.median(w.imag)
    return float(np.max(np.abs(w - med)))
