"""Composite Chebyshev-Lobatto grids.

A :class:`PanelGrid` splits an interval into panels, each carrying ``n``
Chebyshev-Lobatto points.  Neighbouring panels share their endpoint, so a
function on the grid is stored once per unique node.  On every panel the
grid supports spectrally accurate cumulative integration and
differentiation, which is what the ODE propagator, the Volterra solver and
the quasiresolvent all run on.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial import chebyshev as C

DEFAULT_ORDER = 17


@lru_cache(maxsize=8)
def reference_panel(n: int = DEFAULT_ORDER):
    """Nodes and operators on [-1, 1].

    Returns ``(t, L, R, D, w)`` with ``(L f)_j = int_{-1}^{t_j} f``,
    ``(R f)_j = int_{t_j}^{1} f``, ``D`` the differentiation matrix and ``w``
    the Clenshaw-Curtis weights.
    """
    t = -np.cos(np.pi * np.arange(n) / (n - 1))
    V = C.chebvander(t, n - 1)
    Vinv = np.linalg.inv(V)
    eye = np.eye(n)
    anti = np.stack([C.chebval(t, C.chebint(eye[k], lbnd=-1.0)) for k in range(n)], axis=1)
    L = anti @ Vinv
    w = L[-1].copy()
    R = w[None, :] - L
    deriv = np.stack(
        [C.chebval(t, C.chebder(eye[k])) if k > 0 else np.zeros(n) for k in range(n)], axis=1
    )
    D = deriv @ Vinv
    for a in (L, R, D, w):
        a.setflags(write=False)
    return t, L, R, D, w


class PanelGrid:
    """Composite grid defined by its panel edges."""

    def __init__(self, edges, n: int = DEFAULT_ORDER):
        edges = np.asarray(edges, dtype=float)
        if edges.ndim != 1 or edges.size < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("panel edges must be a strictly increasing sequence")
        self.edges = edges
        self.n = n
        t, self._L, self._R, self._D, self._w = reference_panel(n)
        self.half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        panel_nodes = mid[:, None] + self.half[:, None] * t[None, :]
        panel_nodes[:, 0] = edges[:-1]
        panel_nodes[:, -1] = edges[1:]
        self.npanels = edges.size - 1
        self.index = (n - 1) * np.arange(self.npanels)[:, None] + np.arange(n)[None, :]
        self.nodes = np.empty(self.npanels * (n - 1) + 1)
        self.nodes[self.index] = panel_nodes
        self.weights = np.zeros_like(self.nodes)
        np.add.at(self.weights, self.index, self.half[:, None] * self._w[None, :])

    def __len__(self):
        return self.nodes.size

    @property
    def start(self):
        return float(self.edges[0])

    @property
    def end(self):
        return float(self.edges[-1])

    def panel_nodes(self):
        return self.nodes[self.index]

    def panel_view(self, f):
        """Reshape node data ``(N, ...)`` to ``(P, n, ...)``."""
        return np.asarray(f)[self.index]

    def integrate(self, f):
        return np.tensordot(self.weights, np.asarray(f), axes=(0, 0))

    def cumulative_left(self, f):
        """``int_{start}^{x_j} f`` at every node."""
        fp = self.panel_view(f)
        local = np.einsum("jk,pk...->pj...", self._L, fp) * _bcast(self.half, fp)
        offsets = np.concatenate([np.zeros_like(local[:1, -1]), np.cumsum(local[:, -1], axis=0)[:-1]])
        return self._assemble(local + offsets[:, None])

    def cumulative_right(self, f):
        """``int_{x_j}^{end} f`` at every node."""
        fp = self.panel_view(f)
        local = np.einsum("jk,pk...->pj...", self._R, fp) * _bcast(self.half, fp)
        tail = np.cumsum(local[::-1, 0], axis=0)[::-1]
        offsets = np.concatenate([tail[1:], np.zeros_like(tail[:1])])
        return self._assemble(local + offsets[:, None])

    def derivative(self, f):
        """Panelwise spectral derivative; shared nodes get the average."""
        fp = self.panel_view(f)
        local = np.einsum("jk,pk...->pj...", self._D, fp) / _bcast(self.half, fp)
        out = np.zeros((self.nodes.size,) + local.shape[2:], dtype=local.dtype)
        count = np.zeros(self.nodes.size)
        np.add.at(out, self.index, local)
        np.add.at(count, self.index, 1.0)
        return out / count.reshape((-1,) + (1,) * (out.ndim - 1))

    def _assemble(self, local):
        out = np.empty((self.nodes.size,) + local.shape[2:], dtype=local.dtype)
        out[self.index] = local
        return out

    def locate(self, x):
        """Index of the node nearest to ``x``."""
        return int(np.argmin(np.abs(self.nodes - x)))

    def subgrid(self, lo: float, hi: float):
        """Grid made of the panels between two existing edges.

        Returns the subgrid and the offset of its first node in this grid.
        """
        i = int(np.argmin(np.abs(self.edges - lo)))
        j = int(np.argmin(np.abs(self.edges - hi)))
        if not (np.isclose(self.edges[i], lo) and np.isclose(self.edges[j], hi)) or j <= i:
            raise ValueError(f"[{lo}, {hi}] is not spanned by panel edges")
        return PanelGrid(self.edges[i : j + 1], self.n), i * (self.n - 1)

    def __eq__(self, other):
        return (
            isinstance(other, PanelGrid)
            and self.n == other.n
            and self.edges.shape == other.edges.shape
            and bool(np.all(self.edges == other.edges))
        )

    def __hash__(self):
        return hash((self.n, self.edges.tobytes()))


def _bcast(half, fp):
    return half.reshape((-1,) + (1,) * (fp.ndim - 1))


def chebyshev_tail(fp):
    """Relative size of the two highest Chebyshev coefficients per panel.

    ``fp`` has shape ``(P, n, ...)``; the result has shape ``(P,)``.
    """
    n = fp.shape[1]
    t, *_ = reference_panel(n)
    Vinv = np.linalg.inv(C.chebvander(t, n - 1))
    coef = np.abs(np.einsum("kj,pj...->pk...", Vinv, fp))
    coef = coef.reshape(coef.shape[0], n, -1)
    scale = np.max(coef, axis=(1, 2))
    scale = np.where(scale > 0, scale, 1.0)
    return np.max(coef[:, -2:, :], axis=(1, 2)) / scale
