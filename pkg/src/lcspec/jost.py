"""Jost solutions ``f_z = a exp(i Xi) psi_z``.

``psi_z`` solves the Volterra equation

    psi(x) = 1 + (2i)^-1 int_x^inf (1 - exp(2i (Xi(y) - Xi(x)))) rho_z(y) psi(y) dy

on ``[x0, X_inf]``.  The integral is truncated at ``X_inf``.  With
``tail="none"`` the truncated equation is solved as is (``psi(X_inf) = 1``,
``psi'(X_inf) = 0``).  With ``tail="wkb"`` (the default) the part beyond
``X_inf`` is replaced by the second order Liouville-Green expansion
``psi = exp(w)``, ``w' = i rho/2 + (-rho'/2 - i rho^2/4 + xi' rho/(2 xi)) / (2 xi)``,
which turns the truncation error from ``O(int_X^inf |rho|)`` into
``O(int_X^inf |rho|^3 / xi^2 + ...)``.

The equation is solved by successive approximation, block by block from
the right: each block carries at most ``block_budget`` of ``int |rho|``, so
the iteration contracts there regardless of ``|z|``.  The data of the
block to the right enters through the two homogeneous solutions ``1`` and
``exp(-2i Xi)`` of the ``psi`` equation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field, replace
from functools import lru_cache

import numpy as np
from scipy import integrate

from .coefficients import CoefficientField
from .errors import ConvergenceError
from .odecore import GridSolution, chain, flatten, panel_propagators, solver_grid, zscale_for
from .panels import PanelGrid

VOLTERRA_TOL = 1e-13
BLOCK_BUDGET = 0.5
MAX_ITER = 200


@dataclass(frozen=True, eq=False)
class PsiSolution:
    nodes: np.ndarray
    psi: np.ndarray
    dpsi: np.ndarray
    z: complex
    iterations: int
    blocks: int
    end_data: tuple


@dataclass(frozen=True, eq=False)
class JostSolution:
    psi: PsiSolution
    f: GridSolution
    z: complex
    X_inf: float
    tail_bound: float
    tail: str
    meta: dict = dc_field(default_factory=dict)

    def sidecar(self):
        return {
            "z": {"re": self.z.real, "im": self.z.imag},
            "X_inf": self.X_inf,
            "tail_bound": self.tail_bound,
            "tail": self.tail,
            "iterations": self.psi.iterations,
            "blocks": self.psi.blocks,
        }

    def to_csv(self, fh=None):
        return self.f.to_csv(fh)

    def sidecar_json(self):
        return json.dumps(self.sidecar(), sort_keys=True)


# ------------------------------------------------------------------ tail model
def wkb_rate(field: CoefficientField, z, x):
    """``w'`` of the second order expansion ``psi ~ exp(w)``."""
    r = field.rho(z, x)
    dr = field.rho_prime(z, x)
    xi = field.xi(x)
    dxi = field.xi_prime(x)
    return 0.5j * r + (-0.5 * dr - 0.25j * r * r + 0.5 * dxi * r / xi) / (2 * xi)


def tail_data(field: CoefficientField, z, X, tail="wkb"):
    """``(psi(X), psi'(X))`` implied by the tail model."""
    z = complex(z)
    if tail == "none" or not field.analytic:
        return 1.0 + 0j, 0j
    if tail != "wkb":
        raise ValueError(f"unknown tail model {tail!r}")
    first = -0.5j * field.rho_tail(z, X)
    corr = lambda t: wkb_rate(field, z, t) - 0.5j * field.rho(z, t)  # noqa: E731
    top = field.tail_horizon(X)
    re, _ = integrate.quad(lambda t: corr(t).real, X, top, limit=200, epsabs=1e-15)
    im, _ = integrate.quad(lambda t: corr(t).imag, X, top, limit=200, epsabs=1e-15)
    w = first - (re + 1j * im)
    psi = np.exp(w)
    return complex(psi), complex(wkb_rate(field, z, X) * psi)


# ------------------------------------------------------------- Volterra solver
def _blocks(grid: PanelGrid, weight, budget):
    """Panel index ranges ``[(lo, hi), ...]`` from right to left."""
    per_panel = grid.half * (grid.panel_view(np.abs(weight)) @ grid._w)
    out = []
    hi = grid.npanels
    acc = 0.0
    for k in range(grid.npanels - 1, -1, -1):
        if acc + per_panel[k] > budget and k + 1 < hi:
            out.append((k + 1, hi))
            hi = k + 1
            acc = 0.0
        acc += per_panel[k]
    out.append((0, hi))
    return out


def solve_volterra(grid: PanelGrid, rho_vals, Xi, xi, psi_end=1.0, dpsi_end=0.0, tol=VOLTERRA_TOL,
                   block_budget=BLOCK_BUDGET, max_iter=MAX_ITER):
    """Successive approximation for ``psi`` on ``grid``; returns ``(psi, dpsi, iterations, blocks)``.

    ``rho_vals``, ``Xi`` and ``xi`` are node samples; ``psi_end`` and
    ``dpsi_end`` fix the data at the right end of the grid.
    """
    rho_vals = np.asarray(rho_vals, dtype=complex)
    psi = np.empty(len(grid), dtype=complex)
    dpsi = np.empty(len(grid), dtype=complex)
    n1 = grid.n - 1
    total_iter = 0
    blocks = _blocks(grid, rho_vals, block_budget)
    end_psi, end_dpsi = complex(psi_end), complex(dpsi_end)
    for lo, hi in blocks:
        sub = PanelGrid(grid.edges[lo : hi + 1], grid.n)
        sl = slice(lo * n1, hi * n1 + 1)
        r, ph, k = rho_vals[sl], Xi[sl] - Xi[sl][-1], xi[sl]
        rot = np.exp(-2j * ph)
        c2 = -end_dpsi / (2j * k[-1])
        c1 = end_psi - c2
        cur = np.full(len(sub), end_psi, dtype=complex)
        for it in range(1, max_iter + 1):
            g = r * cur
            i1 = sub.cumulative_right(g)
            i2 = sub.cumulative_right(g / rot)
            new = c1 + c2 * rot + (i1 - rot * i2) / 2j
            delta = np.max(np.abs(new - cur))
            cur = new
            if it >= 2 and delta <= tol * max(1.0, np.max(np.abs(cur))):
                break
        else:
            raise ConvergenceError(
                f"Volterra iteration stalled (increment {delta:.3e}, block int|rho| <= {block_budget})"
            )
        total_iter += it
        g = r * cur
        i2 = sub.cumulative_right(g / rot)
        psi[sl] = cur
        dpsi[sl] = k * rot * (i2 - 2j * c2)
        end_psi, end_dpsi = psi[sl][0], dpsi[sl][0]
    return psi, dpsi, total_iter, len(blocks)


def _with_x0(field, x0):
    if x0 is None or x0 == field.x0:
        return field
    return replace(field, x0=float(x0))


def volterra_psi(field: CoefficientField, z, x0=None, X_inf=None, tol=VOLTERRA_TOL, tail="wkb",
                 grid: PanelGrid | None = None):
    """``psi_z`` on ``[x0, X_inf]`` by successive approximation."""
    field = _with_x0(field, x0)
    z = complex(z)
    X = field.default_x_inf() if X_inf is None else float(X_inf)
    if grid is None:
        grid = solver_grid(field, X, zscale_for(z))
    sub, _ = grid.subgrid(field.x0, X)
    x = sub.nodes
    end = tail_data(field, z, X, tail)
    psi, dpsi, its, nb = solve_volterra(
        sub, field.rho(z, x), field.phase(x), field.xi(x), end[0], end[1], tol
    )
    return PsiSolution(x, psi, dpsi, z, its, nb, end)


def _assemble(field, x, psi, dpsi):
    a, da, xi, Xi, p = field.amplitude(x), field.amplitude_prime(x), field.xi(x), field.phase(x), field.p(x)
    e = np.exp(1j * Xi)
    f = a * e * psi
    pf = (p * da + 1j / a) * e * psi + p * a * e * dpsi
    return f, pf


def _extend_left(field, grid, z, f_x0, pf_x0):
    """Backward ODE integration of ``(f, pf')`` from x0 down to 0."""
    if field.x0 <= grid.start:
        return None
    left, _ = grid.subgrid(grid.start, field.x0)
    Y = panel_propagators(field, left, z)[0]
    vals = flatten(left, chain(Y, np.array([[f_x0], [pf_x0]]), start_right=True))
    return left, vals[:, 0, 0], vals[:, 1, 0]


@lru_cache(maxsize=256)
def _jost_cached(field, z, X, tol, tail, grid):
    psi = volterra_psi(field, z, None, X, tol, tail, grid)
    f, pf = _assemble(field, psi.nodes, psi.psi, psi.dpsi)
    ext = _extend_left(field, grid, z, f[0], pf[0])
    if ext is not None:
        _, fl, pfl = ext
        f = np.concatenate([fl[:-1], f])
        pf = np.concatenate([pfl[:-1], pf])
    gsol = GridSolution(grid.nodes, f, pf, z, {"construction": "volterra", "tail": tail}, grid)
    bound = field.abs_rho_tail(z, X)
    return JostSolution(psi, gsol, z, X, bound, tail, {"iterations": psi.iterations, "blocks": psi.blocks})


def jost_solution(field: CoefficientField, z, x0=None, X_inf=None, tol=VOLTERRA_TOL, tail="wkb",
                  grid: PanelGrid | None = None):
    """The Jost solution on ``[0, X_inf]``: Volterra on ``[x0, X_inf]``, ODE below ``x0``."""
    field = _with_x0(field, x0)
    z = complex(z)
    X = field.default_x_inf() if X_inf is None else float(X_inf)
    if grid is None:
        grid = solver_grid(field, X, zscale_for(z))
    return _jost_cached(field, z, X, float(tol), tail, grid)


def jost_by_integration(field: CoefficientField, z, X_inf=None, tail="wkb", grid: PanelGrid | None = None):
    """Independent construction: integrate the ODE backwards from ``X_inf``.

    The end data are ``f = a e^{i Xi} psi``, ``p f' = (p a' + i/a) e^{i Xi} psi + p a e^{i Xi} psi'``
    with ``(psi, psi')`` from the same tail model as the Volterra route.
    """
    z = complex(z)
    X = field.default_x_inf() if X_inf is None else float(X_inf)
    if grid is None:
        grid = solver_grid(field, X, zscale_for(z))
    psi_X, dpsi_X = tail_data(field, z, X, tail)
    fX, pfX = _assemble(field, np.array([X]), np.array([psi_X]), np.array([dpsi_X]))
    Y = panel_propagators(field, grid, z)[0]
    vals = flatten(grid, chain(Y, np.array([[fX[0]], [pfX[0]]]), start_right=True))
    return GridSolution(grid.nodes, vals[:, 0, 0].astype(complex), vals[:, 1, 0].astype(complex), z,
                        {"construction": "backward"}, grid)


def ansatz_solution(field: CoefficientField, z, X_inf=None, grid: PanelGrid | None = None):
    """``A = a e^{i Xi}`` and ``p A'`` sampled on ``[x0, X_inf]`` (not a solution)."""
    z = complex(z)
    X = field.default_x_inf() if X_inf is None else float(X_inf)
    if grid is None:
        grid = solver_grid(field, X, zscale_for(z))
    sub, _ = grid.subgrid(field.x0, X)
    x = sub.nodes
    f, pf = _assemble(field, x, np.ones_like(x, dtype=complex), np.zeros_like(x, dtype=complex))
    return GridSolution(x, f, pf, z, {"construction": "ansatz"}, sub)


def panel_mismatch(field: CoefficientField, sol: GridSolution):
    """Per-node ``(du, d(pu'))``: data minus the ODE propagated from each panel's left node."""
    grid = sol.grid
    Y = panel_propagators(field, grid, sol.z)[0]
    u = grid.panel_view(sol.values)
    v = grid.panel_view(sol.quasiderivs)
    pred = np.einsum("pjab,pb->pja", Y, np.stack([u[:, 0], v[:, 0]], axis=-1))
    return flatten(grid, u - pred[..., 0]), flatten(grid, v - pred[..., 1])


def jost_residual(field: CoefficientField, sol):
    """Relative discrete L^2 norm of the ODE mismatch of sampled ``(f, p f')``.

    Each panel is re-integrated from its left node through the ODE and
    compared with the data at the remaining nodes; ``p f'`` is scaled by
    ``p xi_eff`` to be commensurate with ``f``.
    """
    g = sol.f if isinstance(sol, JostSolution) else sol
    du, dv = panel_mismatch(field, g)
    x = g.nodes
    scale = field.p(x) * field.xi_eff(x, max(abs(g.z), 1.0))
    num = g.grid.integrate(np.abs(du) ** 2 + np.abs(dv / scale) ** 2)
    den = g.grid.integrate(np.abs(g.values) ** 2 + np.abs(g.quasiderivs / scale) ** 2)
    return float(math.sqrt(num / den))
