"""Coefficient fields ``(p, q)`` and their semiclassical data.

The operator is ``-(p u')' - q u`` on the half-line with the boundary
condition ``u'(0) = alpha u(0)`` (``alpha = inf`` meaning ``u(0) = 0``).
Beyond ``x0`` the Liouville-Green amplitude ``a = (p q)^(-1/4)``, the local
wavenumber ``xi = sqrt(q / p)`` and the phase ``Xi = int_{x0}^x xi`` are
available; every quantity the Jost construction needs is derived from
them.

Three families are provided:

* ``power_law(beta, gamma)``: ``p = x**beta``, ``q = x**gamma`` for ``x >= x0``.
  Below ``x0`` the power ``x**beta`` is replaced by the C^1 continuation
  ``x0**beta * exp(beta (x - x0) / x0)`` so that ``p`` stays positive with
  a finite limit at the origin; ``q = x**gamma`` is kept down to 0 when
  ``gamma >= 0`` and frozen at ``x0**gamma`` otherwise.
* ``exponential(kappa)``: ``p = 1``, ``q = exp(2 kappa x)``.
* ``tabulated``: cubic splines through user samples.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field as dc_field
from functools import cached_property

import numpy as np
from scipy import integrate
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .errors import AnsatzDomainError, DomainError

FAMILIES = ("power_law", "exponential", "tabulated")

# Relative step of the central stencil used for (p a')' on tabulated fields;
# the stencil error is O(h^2) times the third derivative of p a'.
TABULATED_FD_STEP = 1e-4

# Phase budget used to pick the default truncation point: Xi(X_inf) ~ this.
DEFAULT_PHASE_BUDGET = 2000.0


@dataclass(frozen=True)
class CoefficientField:
    """Immutable description of ``(p, q)``, ``alpha`` and the anchor ``x0``."""

    family: str
    params: tuple = ()
    alpha: float = 0.0
    x0: float = 1.0
    table: tuple | None = dc_field(default=None, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not self.x0 >= 0:
            raise ValueError("x0 must be non-negative")
        if self.family == "tabulated":
            x, p, q = (np.asarray(t, dtype=float) for t in self.table)
            if x.size < 4 or np.any(np.diff(x) <= 0):
                raise ValueError("tabulated nodes must be strictly increasing (>= 4 nodes)")
            if x[0] > 0 or x[-1] <= self.x0:
                raise ValueError("table must cover [0, x0] and extend beyond x0")
            if np.any(p <= 0):
                raise ValueError("p must be positive")

    # ------------------------------------------------------------------ family
    @property
    def beta(self):
        return self.params[0]

    @property
    def gamma(self):
        return self.params[1]

    @property
    def kappa(self):
        return self.params[0]

    @property
    def analytic(self):
        return self.family != "tabulated"

    @property
    def dirichlet(self):
        return math.isinf(self.alpha)

    @cached_property
    def _splines(self):
        x, p, q = (np.asarray(t, dtype=float) for t in self.table)
        return CubicSpline(x, p), CubicSpline(x, q)

    @cached_property
    def _phase_spline(self):
        x = np.asarray(self.table[0], dtype=float)
        sp, sq = self._splines
        xf = np.linspace(max(self.x0, x[0]), x[-1], max(2000, 10 * x.size))
        qf = sq(xf)
        if np.any(qf <= 0):
            raise AnsatzDomainError("tabulated q is not positive on [x0, x_max]")
        return CubicSpline(xf, np.sqrt(qf / sp(xf))).antiderivative()

    @property
    def domain(self):
        if self.family == "tabulated":
            return (0.0, float(self.table[0][-1]))
        return (0.0, math.inf)

    def _check_domain(self, x):
        x = np.asarray(x, dtype=float)
        lo, hi = self.domain
        if np.any(x < lo - 1e-14) or np.any(x > hi * (1 + 1e-12)):
            raise DomainError(f"x outside field domain [{lo}, {hi}]")
        return x

    def _check_ansatz(self, x):
        x = self._check_domain(x)
        if np.any(x < self.x0 * (1 - 1e-12) - 1e-300):
            raise AnsatzDomainError(f"semiclassical data requested below x0={self.x0}")
        return x

    # ------------------------------------------------------------ coefficients
    def p(self, x):
        x = self._check_domain(x)
        if self.family == "power_law":
            x0, b = self.x0, self.beta
            inner = np.power(np.maximum(x, x0), b)
            with np.errstate(over="ignore"):
                outer = x0**b * np.exp(b * (np.minimum(x, x0) - x0) / x0) if x0 > 0 else inner
            return np.where(x >= x0, inner, outer)
        if self.family == "exponential":
            return np.ones_like(x)
        return self._splines[0](x)

    def dp(self, x):
        x = self._check_domain(x)
        if self.family == "power_law":
            x0, b = self.x0, self.beta
            if b == 0:
                return np.zeros_like(x)
            inner = b * np.power(np.maximum(x, x0), b - 1)
            outer = (b / x0) * x0**b * np.exp(b * (np.minimum(x, x0) - x0) / x0) if x0 > 0 else inner
            return np.where(x >= x0, inner, outer)
        if self.family == "exponential":
            return np.zeros_like(x)
        return self._splines[0](x, 1)

    def q(self, x):
        x = self._check_domain(x)
        if self.family == "power_law":
            g = self.gamma
            if g >= 0:
                return np.power(x, g)
            return np.power(np.maximum(x, self.x0), g)
        if self.family == "exponential":
            return np.exp(2 * self.kappa * x)
        return self._splines[1](x)

    # ------------------------------------------------------------ semiclassics
    def amplitude(self, x):
        x = self._check_ansatz(x)
        if self.family == "power_law":
            return np.power(x, -(self.beta + self.gamma) / 4)
        if self.family == "exponential":
            return np.exp(-self.kappa * x / 2)
        return self._positive_pq(x) ** -0.25

    def amplitude_prime(self, x):
        x = self._check_ansatz(x)
        if self.family == "power_law":
            s = (self.beta + self.gamma) / 4
            return -s * np.power(x, -s - 1)
        if self.family == "exponential":
            return -self.kappa / 2 * np.exp(-self.kappa * x / 2)
        sp, sq = self._splines
        pq = self._positive_pq(x)
        return -0.25 * pq**-1.25 * (sp(x, 1) * sq(x) + sp(x) * sq(x, 1))

    def xi(self, x):
        x = self._check_ansatz(x)
        if self.family == "power_law":
            return np.power(x, (self.gamma - self.beta) / 2)
        if self.family == "exponential":
            return np.exp(self.kappa * x)
        sp, sq = self._splines
        return np.sqrt(sq(x) / sp(x))

    def xi_prime(self, x):
        x = self._check_ansatz(x)
        if self.family == "power_law":
            m = (self.gamma - self.beta) / 2
            return m * np.power(x, m - 1)
        if self.family == "exponential":
            return self.kappa * np.exp(self.kappa * x)
        sp, sq = self._splines
        xi = np.sqrt(sq(x) / sp(x))
        return 0.5 * xi * (sq(x, 1) / sq(x) - sp(x, 1) / sp(x))

    def phase(self, x):
        x = self._check_ansatz(x)
        if self.family == "power_law":
            m1 = (self.gamma - self.beta) / 2 + 1
            if m1 == 0:
                return np.log(x / self.x0)
            return (np.power(x, m1) - self.x0**m1) / m1
        if self.family == "exponential":
            k = self.kappa
            return (np.exp(k * x) - math.exp(k * self.x0)) / k
        Xi = self._phase_spline
        return Xi(x) - Xi(self.x0)

    def drift(self, x):
        """``a (p a')'``, the z-independent part of rho."""
        x = self._check_ansatz(x)
        if self.family == "power_law":
            c, e = self._drift_power()
            return c * np.power(x, e)
        if self.family == "exponential":
            return self.kappa**2 / 4 * np.exp(-self.kappa * x)
        h = TABULATED_FD_STEP * max(1.0, float(np.max(np.abs(x))))
        lo, hi = self.x0, self.domain[1]
        xp = np.minimum(x + h, hi)
        xm = np.maximum(x - h, lo)
        g = lambda t: self.p(t) * self.amplitude_prime(t)  # noqa: E731
        return self.amplitude(x) * (g(xp) - g(xm)) / (xp - xm)

    def drift_prime(self, x):
        x = self._check_ansatz(x)
        if self.family == "power_law":
            c, e = self._drift_power()
            return c * e * np.power(x, e - 1)
        if self.family == "exponential":
            return -self.kappa**3 / 4 * np.exp(-self.kappa * x)
        h = TABULATED_FD_STEP * max(1.0, float(np.max(np.abs(x))))
        xp = np.minimum(x + h, self.domain[1])
        xm = np.maximum(x - h, self.x0)
        return (self.drift(xp) - self.drift(xm)) / (xp - xm)

    def weight(self, x):
        """``a(x)**2``, the coefficient of z in rho."""
        return self.amplitude(x) ** 2

    def weight_prime(self, x):
        return 2 * self.amplitude(x) * self.amplitude_prime(x)

    def rho(self, z, x):
        return self.drift(x) + z * self.weight(x)

    def rho_prime(self, z, x):
        return self.drift_prime(x) + z * self.weight_prime(x)

    def _drift_power(self):
        b = self.beta
        s = (b + self.gamma) / 4
        return -s * (b - s - 1), b - 2 * s - 2

    def _positive_pq(self, x):
        pq = self.p(x) * self.q(x)
        if np.any(pq <= 0):
            raise AnsatzDomainError("q <= 0 encountered in the ansatz region")
        return pq

    # ------------------------------------------------------------------ tails
    def weight_tail(self, x):
        """``int_x^inf a**2``; ``inf`` if the amplitude is not square integrable."""
        if self.family == "power_law":
            e = -(self.beta + self.gamma) / 2
            return _power_tail(1.0, e, x)
        if self.family == "exponential":
            return np.exp(-self.kappa * np.asarray(x, dtype=float)) / self.kappa if self.kappa > 0 else math.inf
        return 0.0

    def drift_tail(self, x):
        """``int_x^inf a (p a')'``."""
        if self.family == "power_law":
            c, e = self._drift_power()
            return _power_tail(c, e, x)
        if self.family == "exponential":
            return self.kappa / 4 * np.exp(-self.kappa * np.asarray(x, dtype=float)) if self.kappa > 0 else math.inf
        return 0.0

    def rho_tail(self, z, x):
        """``int_x^inf rho_z`` (zero for tabulated fields: no data beyond the table)."""
        return self.drift_tail(x) + z * self.weight_tail(x)

    def abs_rho_tail(self, z, x):
        """``int_x^inf |rho_z|``, the truncation bound of the Volterra equation."""
        if not self.analytic:
            return 0.0
        f = lambda t: abs(self.drift(t) + z * self.weight(t))  # noqa: E731
        val, _ = integrate.quad(f, x, self.tail_horizon(x), limit=200)
        return val

    def tail_horizon(self, x):
        """Upper limit for tail quadratures started at ``x``."""
        if self.family == "exponential":
            return x + 40.0 / self.kappa
        return math.inf

    def xi_eff(self, x, zscale=0.0):
        """Local wavenumber of the full equation, ``sqrt((|q| + |z|) / p)``."""
        return np.sqrt((np.abs(self.q(x)) + abs(zscale)) / self.p(x))

    def default_x_inf(self, phase_budget=DEFAULT_PHASE_BUDGET):
        if self.family == "tabulated":
            return float(self.table[0][-1])
        cap = 1000.0 * max(1.0, self.x0)
        with np.errstate(over="ignore"):
            cap_phase = self.phase(cap)
            if cap_phase <= phase_budget:
                return cap
            return float(brentq(lambda t: self.phase(t) - phase_budget, self.x0 + 1e-9, cap, xtol=1e-12))

    # -------------------------------------------------------------------- I/O
    def to_config(self):
        cfg = {"family": self.family, "alpha": "inf" if self.dirichlet else self.alpha, "x0": self.x0}
        if self.family == "power_law":
            cfg.update(beta=self.beta, gamma=self.gamma)
        elif self.family == "exponential":
            cfg.update(kappa=self.kappa)
        else:
            cfg.update(x=list(self.table[0]), p=list(self.table[1]), q=list(self.table[2]))
        return cfg


def _power_tail(c, e, x):
    if c == 0:
        return 0.0
    if e >= -1:
        return math.inf
    return -c * x ** (e + 1) / (e + 1)


def power_law(beta, gamma, alpha=0.0, x0=1.0):
    return CoefficientField("power_law", (float(beta), float(gamma)), float(alpha), float(x0))


def exponential(kappa=1.0, alpha=0.0, x0=0.0):
    return CoefficientField("exponential", (float(kappa),), float(alpha), float(x0))


def tabulated(x, p, q, alpha=0.0, x0=1.0):
    table = tuple(tuple(float(v) for v in arr) for arr in (x, p, q))
    return CoefficientField("tabulated", (), float(alpha), float(x0), table)


def parse_alpha(value):
    if isinstance(value, str):
        if value.strip().lower() in ("inf", "infinity", "+inf"):
            return math.inf
        return float(value)
    return float(value)


def field_from_config(cfg):
    """Build a field from its JSON dictionary (``alpha: "inf"`` encodes alpha = inf)."""
    if isinstance(cfg, str):
        cfg = json.loads(cfg)
    family = cfg.get("family")
    alpha = parse_alpha(cfg.get("alpha", 0.0))
    if family == "power_law":
        return power_law(cfg["beta"], cfg["gamma"], alpha, cfg.get("x0", 1.0))
    if family == "exponential":
        return exponential(cfg.get("kappa", 1.0), alpha, cfg.get("x0", 0.0))
    if family == "tabulated":
        return tabulated(cfg["x"], cfg["p"], cfg["q"], alpha, cfg.get("x0", 1.0))
    raise ValueError(f"unknown family {family!r}")


# ----------------------------------------------------------------- operations
def eval_field(field: CoefficientField, x):
    """Pointwise ``(p, p', q)``."""
    if np.any(np.asarray(x) < 0):
        raise DomainError("x must be non-negative")
    return field.p(x), field.dp(x), field.q(x)


def semiclassical(field: CoefficientField, x):
    """Amplitude, wavenumber and phase ``(a, xi, Xi)`` at ``x >= x0``."""
    return field.amplitude(x), field.xi(x), field.phase(x)


def rho(field: CoefficientField, z, x):
    """Volterra kernel weight ``rho_z = a (p a')' + z a**2``."""
    return field.rho(z, x)


@dataclass(frozen=True)
class ConditionConfig:
    """Thresholds for the numerical limit-circle test."""

    increment_tol: float = 1e-2
    ratio_max: float = 0.9
    boundary_tol: float = 1e-1


@dataclass(frozen=True)
class ConditionReport:
    a_L2_tail: float
    drift_L1_tail: float
    boundary_decay: float
    verdict: str
    reason: str | None = None
    diagnostics: dict = dc_field(default_factory=dict)

    @property
    def confirmed(self):
        return self.verdict == "limit_circle_confirmed"

    def to_dict(self):
        return {
            "a_L2_tail": self.a_L2_tail,
            "drift_L1_tail": self.drift_L1_tail,
            "boundary_decay": self.boundary_decay,
            "verdict": self.verdict if self.reason is None else f"failed({self.reason})",
            "diagnostics": self.diagnostics,
        }


def _tail_extrapolate(values):
    """Geometric extrapolation from integrals over [x0, X], [x0, 2X], [x0, 4X]."""
    i1, i2, i3 = values
    d1, d2 = i2 - i1, i3 - i2
    if d1 <= 0 and d2 <= 0:
        return i3, 0.0
    ratio = d2 / d1 if d1 > 0 else math.inf
    if ratio >= 1:
        return math.inf, ratio
    return i3 + d2 * ratio / (1 - ratio), ratio


def check_lc_conditions(field: CoefficientField, far_cutoff=None, thresholds=ConditionConfig()):
    """Test ``a in L^2``, ``a (p a')' in L^1`` and ``p a' a -> 0`` beyond x0."""
    x0 = field.x0
    X = far_cutoff if far_cutoff is not None else max(10.0 * max(x0, 1.0), x0 + 10.0)
    if field.family == "tabulated":
        X = min(X, field.domain[1] / 4)
    if not X > x0:
        raise ValueError("far_cutoff must exceed x0")

    cuts = [X, 2 * X, 4 * X]
    try:
        l2 = [integrate.quad(lambda t: field.weight(t), x0, c, limit=400)[0] for c in cuts]
        l1 = [integrate.quad(lambda t: abs(field.drift(t)), x0, c, limit=400)[0] for c in cuts]
        far = np.geomspace(X, 4 * X, 64)
        bd = np.abs(field.p(far) * field.amplitude_prime(far) * field.amplitude(far))
    except AnsatzDomainError as exc:
        return ConditionReport(math.nan, math.nan, math.nan, "failed", "q_not_positive", {"error": str(exc)})

    a_tail, a_ratio = _tail_extrapolate(l2)
    d_tail, d_ratio = _tail_extrapolate(l1)
    half = far.size // 2
    bd_near, bd_far = float(np.max(bd[:half])), float(np.max(bd[half:]))
    diagnostics = {
        "far_cutoff": X,
        "a_L2_partial": l2,
        "drift_L1_partial": l1,
        "a_ratio": a_ratio,
        "drift_ratio": d_ratio,
        "boundary_near": bd_near,
        "boundary_far": bd_far,
    }

    if field.family == "power_law":
        b, g = field.beta, field.gamma
        diagnostics["criterion"] = "beta+gamma>2 and beta-gamma<2"
        if not b + g > 2:
            return ConditionReport(a_tail, d_tail, bd_far, "failed", "a_not_L2", diagnostics)
        if not b - g < 2:
            return ConditionReport(a_tail, d_tail, bd_far, "failed", "drift_not_L1", diagnostics)
        return ConditionReport(a_tail, d_tail, bd_far, "limit_circle_confirmed", None, diagnostics)

    def increment_small(vals, ratio):
        scale = max(abs(vals[-1]), 1e-300)
        return ratio < thresholds.ratio_max and (vals[2] - vals[1]) / scale < thresholds.increment_tol

    if not math.isfinite(a_tail):
        return ConditionReport(a_tail, d_tail, bd_far, "failed", "a_not_L2", diagnostics)
    if not math.isfinite(d_tail):
        return ConditionReport(a_tail, d_tail, bd_far, "failed", "drift_not_L1", diagnostics)
    if not (bd_far <= bd_near and bd_far < thresholds.boundary_tol):
        return ConditionReport(a_tail, d_tail, bd_far, "failed", "boundary_not_decaying", diagnostics)
    if not (increment_small(l2, a_ratio) and increment_small(l1, d_ratio)):
        return ConditionReport(a_tail, d_tail, bd_far, "failed", "inconclusive", diagnostics)
    return ConditionReport(a_tail, d_tail, bd_far, "limit_circle_confirmed", None, diagnostics)
