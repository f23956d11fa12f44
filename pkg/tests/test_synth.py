import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tdfc import (ControllerDesign, ModeTarget, NonHyperbolicError, certify, complex_gain,
                  jordan_gain, jordan_return_matrix, monodromy_matrix, scalar_gain, synthesize,
                  uniform_targets)
from tdfc.matlin import DefectiveMatrixError


def _scalar_multiplier(lam, tau, eps):
    e = math.exp(lam * tau)
    return e ** 3 + eps * tau * e * (1 - e)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 3.0), st.floats(0.02, 0.5), st.floats(-0.99, 0.99))
def test_scalar_gain_places_multiplier(lam, tau, zeta):
    eps = scalar_gain(lam, tau, zeta)
    assert _scalar_multiplier(lam, tau, eps) == pytest.approx(zeta, abs=1e-9 * math.exp(3 * lam * tau))


def test_scalar_gain_closed_form_value():
    lam, tau, zeta = 2.0, 0.1, 0.4
    ref = math.exp(-0.2) * (math.exp(0.6) - 0.4) / (0.1 * (math.exp(0.2) - 1))
    assert scalar_gain(lam, tau, zeta) == pytest.approx(ref, rel=1e-14)


def test_scalar_gain_rejects_stable_mode():
    with pytest.raises(ValueError):
        scalar_gain(-1.0, 0.1, 0.4)
    with pytest.raises(ValueError):
        scalar_gain(1.0, 0.0, 0.4)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 2.0), st.floats(0.1, 3.0), st.floats(0.02, 0.4), st.floats(0.0, 0.95),
       st.floats(0.0, 6.28))
def test_complex_gain_places_multiplier(mu, om, tau, rho, theta):
    e1, e2 = complex_gain(mu, om, tau, rho, theta)
    lam, eps = complex(mu, om), complex(e1, e2)
    e = cmath.exp(lam * tau)
    z = e ** 3 + eps * tau * e * (1 - e)
    assert abs(z - cmath.rect(rho, theta)) <= 1e-9 * math.exp(3 * mu * tau)


def test_complex_gain_auto_angle():
    mu, om = 0.1854, 3.047
    assert complex_gain(mu, om, 0.25, 0.6) == complex_gain(mu, om, 0.25, 0.6, math.atan(om / mu))


def test_mode_target_validation():
    with pytest.raises(ValueError):
        ModeTarget(0, 'real', zeta=1.0)
    with pytest.raises(ValueError):
        ModeTarget(0, 'complex', rho=1.2)
    with pytest.raises(ValueError):
        ModeTarget(0, 'complex', rho=0.5, theta=7.0)
    with pytest.raises(ValueError):
        ModeTarget(0, 'bogus', zeta=0.1)
    t = ModeTarget(0, 'complex', rho=0.5)
    assert t.multiplier(complex(1.0, 1.0)) == pytest.approx(cmath.rect(0.5, math.pi / 4))


def test_jordan_return_matrix_matches_period_map():
    lam, tau = 0.8, 0.2
    eps = jordan_gain(lam, tau, 0.3)
    J = np.array([[lam, 1.0], [0.0, lam]])
    M = monodromy_matrix(J, eps * np.eye(2), tau).M
    R = jordan_return_matrix(lam, tau, eps)
    assert np.allclose(M, R, rtol=1e-11, atol=1e-12)
    assert R[0, 0] == pytest.approx(0.3)


def test_synthesize_jordan_block():
    J = np.array([[0.8, 1.0, 0.0], [0.0, 0.8, 0.0], [0.0, 0.0, -1.0]])
    with pytest.raises(DefectiveMatrixError):
        synthesize(J, 0.2, [ModeTarget(0, 'real', zeta=0.3), ModeTarget(1, 'real', zeta=0.3)])
    d = synthesize(J, 0.2, uniform_targets(J, zeta=0.3, jordan=True), jordan=True)
    mult = monodromy_matrix(J, d.K, 0.2).multipliers.eigenvalues
    assert np.allclose(sorted(mult.real), sorted([0.3, 0.3, math.exp(-0.6)]), atol=1e-7)


def test_synthesize_gain_structure():
    A = np.array([[2.0, 0.0, 0.0], [0.0, -1.0, -3.0], [0.0, 3.0, -1.0]])
    d = synthesize(A, 0.1, uniform_targets(A, zeta=0.4))
    lay = d.layout
    assert lay[0].kind == 'real' and lay[1].kind == 'complex'
    assert d.Ktilde[0, 0] == pytest.approx(scalar_gain(2.0, 0.1, 0.4))
    assert np.all(d.Ktilde[1:, :] == 0) and np.all(d.Ktilde[:, 1:] == 0)
    assert np.allclose(d.block_form.Vinv @ d.Ktilde @ d.block_form.V, d.K)


def test_stable_matrix_gives_zero_gain():
    A = np.diag([-1.0, -2.0])
    d = synthesize(A, 0.3, [])
    assert np.array_equal(d.K, np.zeros((2, 2)))
    assert certify(d).certified


def test_synthesize_errors():
    A = np.diag([1.0, -2.0])
    with pytest.raises(ValueError, match='no target'):
        synthesize(A, 0.1, [])
    with pytest.raises(ValueError, match='stable mode'):
        synthesize(A, 0.1, [ModeTarget(0, 'real', zeta=0.1), ModeTarget(1, 'real', zeta=0.1)])
    with pytest.raises(ValueError, match='duplicate'):
        synthesize(A, 0.1, [ModeTarget(0, 'real', zeta=0.1), ModeTarget(0, 'real', zeta=0.2)])
    with pytest.raises(ValueError, match='complex'):
        synthesize(A, 0.1, [ModeTarget(0, 'complex', rho=0.1)])
    with pytest.raises(NonHyperbolicError):
        synthesize(np.array([[0.0, -1.0], [1.0, 0.0]]), 0.1, [])
    with pytest.raises(ValueError):
        synthesize(A, -0.1, [ModeTarget(0, 'real', zeta=0.1)])


def test_distinct_targets_per_mode():
    A = np.diag([1.0, 0.5, -1.0])
    d = synthesize(A, 0.2, [ModeTarget(0, 'real', zeta=0.1), ModeTarget(1, 'real', zeta=-0.5)])
    rep = certify(d)
    assert rep.certified
    assert sorted(np.round(rep.multipliers.eigenvalues.real, 9)) == sorted(
        np.round([0.1, -0.5, math.exp(-0.6)], 9))


def test_design_round_trip():
    A = np.array([[0.5, -2.0, 0.1], [2.0, 0.5, 0.0], [0.0, 0.3, -1.0]])
    d = synthesize(A, 0.2, uniform_targets(A, rho=0.3))
    d2 = ControllerDesign.from_dict(d.to_dict())
    assert np.array_equal(d2.K, d.K) and not d2.overridden
    d3 = d.with_gain(d.K + 0.01)
    assert d3.overridden
    d4 = ControllerDesign.from_dict(d3.to_dict())
    assert d4.overridden and np.array_equal(d4.K, d3.K)
