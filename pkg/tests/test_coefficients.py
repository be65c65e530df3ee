import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

import lcspec
from lcspec.coefficients import (
    check_lc_conditions,
    eval_field,
    field_from_config,
    rho,
    semiclassical,
    tabulated,
)
from lcspec.errors import AnsatzDomainError, DomainError

LC_FIELDS = [(0.0, 4.0), (2.0, 2.0), (-1.0, 4.0), (1.0, 3.0), (0.5, 5.5)]


def test_eval_field_power_examples():
    assert eval_field(lcspec.power_law(0, 4), 2.0) == pytest.approx((1.0, 0.0, 16.0))
    assert eval_field(lcspec.power_law(2, 2), 3.0) == pytest.approx((9.0, 6.0, 9.0))


def test_eval_field_exponential_origin():
    assert eval_field(lcspec.exponential(1.0), 0.0) == pytest.approx((1.0, 0.0, 1.0))


def test_eval_field_rejects_negative_x(p04):
    with pytest.raises(DomainError):
        eval_field(p04, -0.5)


def test_semiclassical_power04():
    a, xi, Xi = semiclassical(lcspec.power_law(0, 4, x0=1.0), 2.0)
    assert (a, xi, Xi) == pytest.approx((0.5, 4.0, 7.0 / 3.0), rel=1e-14)


def test_semiclassical_power22():
    x = np.linspace(1.0, 20.0, 50)
    a, xi, Xi = semiclassical(lcspec.power_law(2, 2), x)
    np.testing.assert_allclose(a, 1.0 / x, rtol=1e-14)
    np.testing.assert_allclose(xi, 1.0, rtol=1e-14)
    np.testing.assert_allclose(Xi, x - 1.0, rtol=1e-13, atol=1e-14)


def test_ansatz_below_x0_rejected(p04):
    with pytest.raises(AnsatzDomainError):
        p04.amplitude(0.5)


def test_rho_power04():
    x = np.linspace(1.0, 30.0, 40)
    z = 0.3 - 1.7j
    np.testing.assert_allclose(rho(lcspec.power_law(0, 4), z, x), 2 * x**-4 + z * x**-2, rtol=1e-12)


def test_rho_exponential():
    x = np.linspace(0.0, 8.0, 40)
    z = 2.0 + 0.5j
    np.testing.assert_allclose(rho(lcspec.exponential(1.0), z, x), (z + 0.25) * np.exp(-x), rtol=1e-12)


@pytest.mark.parametrize("bg", LC_FIELDS + [(0.0, 1.0)])
@given(x=st.floats(1.0, 500.0))
def test_amplitude_identity(bg, x):
    f = lcspec.power_law(*bg)
    assert abs(f.p(x) * f.xi(x) * f.amplitude(x) ** 2 - 1.0) <= 1e-12


@given(x=st.floats(0.0, 12.0))
def test_amplitude_identity_exponential(x):
    f = lcspec.exponential(1.0)
    assert abs(f.p(x) * f.xi(x) * f.amplitude(x) ** 2 - 1.0) <= 1e-12


@pytest.mark.parametrize("bg", LC_FIELDS)
@given(x1=st.floats(1.0, 200.0), dx=st.floats(1e-3, 50.0))
def test_phase_monotone(bg, x1, dx):
    f = lcspec.power_law(*bg)
    assert f.phase(x1 + dx) > f.phase(x1)


@pytest.mark.parametrize("bg", LC_FIELDS)
@given(
    z1=st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
    z2=st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False),
    x=st.floats(1.0, 100.0),
)
def test_rho_linear_in_z(bg, z1, z2, x):
    f = lcspec.power_law(*bg)
    lhs = f.rho(z1, x) - f.rho(z2, x)
    rhs = (z1 - z2) * f.weight(x)
    assert abs(lhs - rhs) <= 1e-13 * (abs(rhs) + abs(f.rho(z1, x)) + 1e-300)


def test_tail_integrals_match_quadrature(p04):
    from scipy import integrate

    X = 5.0
    A = integrate.quad(p04.weight, X, np.inf)[0]
    D = integrate.quad(p04.drift, X, np.inf)[0]
    assert p04.weight_tail(X) == pytest.approx(A, rel=1e-10)
    assert p04.drift_tail(X) == pytest.approx(D, rel=1e-10)


def test_p_positive_with_finite_limit_at_origin():
    for bg in LC_FIELDS:
        f = lcspec.power_law(*bg)
        x = np.linspace(0.0, 5.0, 101)
        assert np.all(f.p(x) > 0)
        assert np.isfinite(f.p(0.0)) and np.isfinite(f.q(0.0))


def test_p_continuously_differentiable_at_x0():
    f = lcspec.power_law(-1.0, 4.0)
    e = 1e-7
    assert f.p(1 - e) == pytest.approx(f.p(1 + e), rel=1e-6)
    assert f.dp(1 - e) == pytest.approx(f.dp(1 + e), rel=1e-5)


@pytest.mark.parametrize(
    "bg, verdict",
    [((0, 4), "limit_circle_confirmed"), ((0, 1), "failed(a_not_L2)"), ((-1, 4), "limit_circle_confirmed")],
)
def test_classification_examples(bg, verdict):
    assert check_lc_conditions(lcspec.power_law(*bg)).to_dict()["verdict"] == verdict


def _grid_points():
    for b in np.arange(-2.0, 4.01, 0.5):
        for g in np.arange(0.0, 6.01, 0.5):
            # points on the criterion's boundary lines are not decidable numerically
            if abs(b + g - 2) >= 0.5 and abs(b - g - 2) >= 0.5:
                yield float(b), float(g)


@pytest.mark.parametrize("bg", list(_grid_points()))
def test_classification_matches_criterion(bg):
    b, g = bg
    rep = check_lc_conditions(lcspec.power_law(b, g))
    expected = b + g > 2 and b - g < 2
    assert rep.confirmed == expected
    # the numerically measured growth ratios tell the same story
    d = rep.diagnostics
    if b + g > 2:
        assert d["a_ratio"] < 1
        assert d["drift_ratio"] < 1 or not b - g < 2
    else:
        assert d["a_ratio"] > 1


def test_classification_exponential(expo):
    rep = check_lc_conditions(expo)
    assert rep.confirmed
    assert rep.a_L2_tail == pytest.approx(1.0, rel=1e-6)


def test_tabulated_matches_analytic():
    x = np.linspace(0.0, 60.0, 6001)
    tab = tabulated(x, np.ones_like(x), np.maximum(x, 0.2) ** 4)
    ana = lcspec.power_law(0, 4)
    t = np.linspace(1.0, 10.0, 30)
    np.testing.assert_allclose(tab.amplitude(t), ana.amplitude(t), rtol=1e-6)
    np.testing.assert_allclose(tab.phase(t), ana.phase(t), rtol=1e-6)
    np.testing.assert_allclose(tab.drift(t), ana.drift(t), rtol=1e-2, atol=1e-6)


def test_field_from_config_roundtrip():
    cfg = {"family": "power_law", "beta": 0.0, "gamma": 4.0, "alpha": 0.0, "x0": 1.0}
    f = field_from_config(json.dumps(cfg))
    assert f == lcspec.power_law(0.0, 4.0)
    assert field_from_config(f.to_config()) == f


def test_field_from_config_alpha_inf():
    f = field_from_config({"family": "power_law", "beta": 0, "gamma": 4, "alpha": "inf"})
    assert math.isinf(f.alpha) and f.dirichlet


def test_field_from_config_unknown_family():
    with pytest.raises(ValueError):
        field_from_config({"family": "bogus"})


def test_default_x_inf_increases_with_phase_budget(p04):
    X = p04.default_x_inf()
    assert X > p04.x0 and np.isfinite(X)
