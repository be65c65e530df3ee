import numpy as np
import pytest

import lcspec
from lcspec.connection import (
    coefficient_table,
    connect,
    default_match_point,
    phi_norm_squared,
    verify_lc2p,
)
from lcspec.errors import AccuracyError, DomainError

ZS = [0.0, 1.0, 1j, -2 + 0.5j]


@pytest.mark.parametrize("z", ZS)
def test_wronskian_identity(p04, z):
    assert connect(p04, z).wro_residual <= 100 * 1e-10


@pytest.mark.parametrize("lam", [0.0, 1.0, 7.3, -4.0])
def test_real_axis_symmetry(p22, lam):
    c = connect(p22, lam)
    assert abs(c.sigma_plus) == pytest.approx(abs(c.sigma_minus), rel=1e-8)
    assert c.sigma_minus == pytest.approx(np.conj(c.sigma_plus), rel=1e-8)
    assert c.tau_minus == pytest.approx(np.conj(c.tau_plus), rel=1e-8)


@pytest.mark.parametrize("z", [1j, 2 + 0.5j, -1 - 0.3j])
def test_conjugation(p04, z):
    a = connect(p04, z)
    b = connect(p04, np.conj(z))
    assert a.sigma_minus == pytest.approx(np.conj(b.sigma_plus), rel=1e-8)
    assert a.tau_minus == pytest.approx(np.conj(b.tau_plus), rel=1e-8)


@pytest.mark.parametrize("z", [1j, 0.5 + 2j, -3 + 0.1j])
def test_dissipation_sign(pm14, z):
    c = connect(pm14, z)
    assert abs(c.sigma_minus) > abs(c.sigma_plus)


def test_x_match_independence(p04):
    X = p04.default_x_inf()
    a = connect(p04, 1 + 1j, x_match=2.0, X_inf=X)
    b = connect(p04, 1 + 1j, x_match=0.7 * X, X_inf=X)
    for k in ("sigma_plus", "sigma_minus", "tau_plus", "tau_minus"):
        assert abs(getattr(a, k) - getattr(b, k)) <= 100 * 1e-10 * a.cond


def test_default_match_point_halves_phase(p04):
    X = 20.0
    xm = default_match_point(p04, X)
    assert p04.phase(xm) == pytest.approx(0.5 * p04.phase(X), rel=1e-10)


def test_entire_in_z(p04):
    z0, h = 0.3 + 0.4j, 1e-3

    def s(z):
        return connect(p04, z).sigma_plus

    dx = (s(z0 + h) - s(z0 - h)) / (2 * h)
    dy = (s(z0 + 1j * h) - s(z0 - 1j * h)) / (2 * h)
    assert abs(dy - 1j * dx) <= 1e-5 * abs(dx)


def test_lc2p_at_i(p04):
    lhs, rhs, gap = verify_lc2p(p04, 1j)
    assert gap / abs(lhs) <= 1e-4


def test_lc2p_real_vanishes(p04):
    assert verify_lc2p(p04, 2.0) == (0.0, 0.0, 0.0)


def test_lc2p_conjugate_flips(p04):
    lhs, _, _ = verify_lc2p(p04, 1j)
    lhs_bar, _, _ = verify_lc2p(p04, -1j)
    assert lhs_bar == pytest.approx(-lhs, rel=1e-8)


def test_norm_tail_leading_order(p04):
    X = p04.default_x_inf()
    c = connect(p04, 1j, X_inf=X)
    total, tail, cross = phi_norm_squared(p04, 1j, X_inf=X, coeffs=c)
    lead = (abs(c.sigma_plus) ** 2 + abs(c.sigma_minus) ** 2) * p04.weight_tail(X)
    assert tail == pytest.approx(lead, rel=0.1)
    assert cross < 0.1 * tail < total


def test_accuracy_error_on_strict_limit(p04):
    with pytest.raises(AccuracyError):
        connect(p04, 1j, spread_limit=1e-18)


def test_rejects_large_imaginary_part(p04):
    with pytest.raises(DomainError):
        connect(p04, 12j)


def test_x_match_outside(p04):
    with pytest.raises(ValueError):
        connect(p04, 0.0, x_match=1e6)


def test_coefficient_table(p04):
    text = coefficient_table([connect(p04, z) for z in ZS])
    lines = text.splitlines()
    assert lines[0].startswith("re_z,im_z,re_sigma_plus")
    assert lines[0].endswith("wro_residual")
    assert len(lines) == 1 + len(ZS)
    vals = [float(v) for v in lines[3].split(",")]
    assert vals[:2] == [0.0, 1.0]


def test_sigma_depends_on_x0_by_unimodular_factor():
    a = connect(lcspec.power_law(0, 4, x0=1.0), 1j)
    b = connect(lcspec.power_law(0, 4, x0=1.5), 1j)
    # moving x0 multiplies f_z by exp(i (Xi_1 - Xi_2)), a unimodular constant
    assert abs(b.sigma_plus) == pytest.approx(abs(a.sigma_plus), rel=1e-6)
    assert abs(b.sigma_minus) == pytest.approx(abs(a.sigma_minus), rel=1e-6)
    assert b.wro_residual <= 1e-8
