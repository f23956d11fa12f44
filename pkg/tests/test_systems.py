import numpy as np
import pytest

from tdfc import DOUBLE_HOOK, DOUBLE_SCROLL, KONISHI_DOUBLE_SCROLL, ChuaParams, chua, eig, linear, rossler
from tdfc.systems import get_system

PRESETS = [DOUBLE_SCROLL, DOUBLE_HOOK, KONISHI_DOUBLE_SCROLL]


@pytest.mark.parametrize('p', PRESETS)
def test_regional_form_equals_characteristic_form(p):
    sys_ = chua(p)
    rng = np.random.default_rng(11)
    pts = rng.uniform(-4, 4, size=(100_000, 3))
    pts[:1000, 0] = rng.choice([-1.0, 1.0], 1000)
    diff = max(np.max(np.abs(sys_.rhs(x) - p.rhs_direct(x))) for x in pts)
    assert diff <= 1e-12 * 40


@pytest.mark.parametrize('p', PRESETS)
def test_continuity_across_seams(p):
    f = chua(p).rhs
    rng = np.random.default_rng(1)
    for y, z in rng.uniform(-3, 3, size=(50, 2)):
        for s in (-1.0, 1.0):
            lo, hi = np.nextafter(s, -np.inf), np.nextafter(s, np.inf)
            assert np.allclose(f(np.array([lo, y, z])), f(np.array([hi, y, z])), atol=1e-12)


@pytest.mark.parametrize('system', [chua(p) for p in PRESETS] + [rossler()])
def test_equilibria_residual(system):
    assert system.equilibria
    for x in system.equilibria:
        assert np.linalg.norm(system.rhs(x)) < 1e-10


@pytest.mark.parametrize('system', [chua(DOUBLE_SCROLL), chua(DOUBLE_HOOK), rossler()])
def test_jacobian_finite_differences(system):
    rng = np.random.default_rng(5)
    checked = 0
    for x in rng.uniform(-3, 3, size=(200, 3)):
        if system.name == 'chua' and min(abs(x[0] - 1), abs(x[0] + 1)) < 1e-3:
            continue
        J = system.jacobian(x)
        step = 1e-6
        fd = np.column_stack([(system.rhs(x + step * e) - system.rhs(x - step * e)) / (2 * step)
                              for e in np.eye(3)])
        assert np.allclose(fd, J, rtol=1e-5, atol=1e-5 * max(1.0, np.abs(J).max()))
        checked += 1
    assert checked > 150


def test_chua_equilibria_regions():
    s = chua(KONISHI_DOUBLE_SCROLL)
    assert len(s.equilibria) == 3
    assert np.allclose(s.equilibria[1], [1.5, 0.0, -1.5])
    assert np.allclose(s.equilibria[2], [-1.5, 0.0, 1.5])
    assert s.region(s.equilibria[1]) == 1 and s.region(s.equilibria[2]) == -1
    assert s.region(np.array([1.0, 0, 0])) == 0


def test_double_scroll_origin_jacobian():
    s = chua(DOUBLE_SCROLL)
    assert np.array_equal(s.jacobian(np.zeros(3)), DOUBLE_SCROLL.A2)


def test_outer_equilibria_outside_region_excluded(caplog):
    # m0 = m1 removes the kink: no outer equilibria
    s = chua(ChuaParams(1.0, 1.0, 1.0, 0.5, 0.5))
    assert len(s.equilibria) == 1


def test_singular_outer_matrix_reported(caplog):
    # with gamma = 0, det A1 = -alpha beta (1 + m1)
    p = ChuaParams(alpha=2.0, beta=1.0, gamma=0.0, m0=-2.0, m1=-1.0)
    assert abs(np.linalg.det(p.A1)) < 1e-12
    s = chua(p)
    assert len(s.equilibria) == 1
    assert 'singular' in caplog.text


def test_chua_params_validation():
    with pytest.raises(ValueError):
        ChuaParams(np.nan, 1, 1, 1, 1)


def test_rossler_inner_equilibrium():
    s = rossler()
    x = s.equilibria[0]
    assert np.allclose(x, [0.0070, -0.0351, 0.0351], atol=1e-4)
    assert np.linalg.norm(s.rhs(x)) < 1e-9
    assert s.equilibria[1][0] > 5


def test_double_hook_eigenvalues():
    w = eig(chua(DOUBLE_HOOK).jacobian(np.zeros(3))).eigenvalues
    assert np.allclose(w.real, [1.4336, -3.7467, -6.2768], atol=1e-3)


def test_linear_system():
    A = np.array([[1.0, 2.0], [-3.0, 0.5]])
    s = linear(A)
    x, y = np.array([1.0, -2.0]), np.array([0.3, 4.0])
    assert np.allclose(s.rhs(2 * x - 3 * y), 2 * s.rhs(x) - 3 * s.rhs(y))
    assert np.array_equal(s.jacobian(x), A)
    assert np.array_equal(linear(np.zeros((2, 2))).rhs(x), np.zeros(2))
    with pytest.raises(ValueError):
        linear(np.ones(3))


def test_equilibrium_lookup():
    s = chua(KONISHI_DOUBLE_SCROLL)
    assert np.array_equal(s.equilibrium(2), s.equilibria[2])
    assert np.allclose(s.equilibrium([-1.5, 0, 1.5]), [-1.5, 0, 1.5])
    with pytest.raises(ValueError):
        s.equilibrium([1.0, 1.0, 1.0])
    with pytest.raises(IndexError):
        s.equilibrium(5)


def test_get_system():
    assert get_system('chua', 'double_hook').params['alpha'] == -6.0
    assert get_system('chua', 'double_scroll', alpha=9.0).params['alpha'] == 9.0
    assert get_system('rossler', c=4.0).params['c'] == 4.0
    for bad in (lambda: get_system('lorenz'), lambda: get_system('chua', 'nope'),
                lambda: get_system('chua', foo=1.0), lambda: get_system('rossler', 'x')):
        with pytest.raises(KeyError):
            bad()


def test_rossler_inner_jacobian_spectrum():
    s = rossler()
    w = eig(s.jacobian(s.equilibria[0])).eigenvalues
    assert np.allclose(w, [0.09703 + 0.99519j, 0.09703 - 0.99519j, -5.68698], atol=1e-4)
