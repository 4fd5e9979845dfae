import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import spherical_jn, spherical_yn

from jostexp.riccati import (
    hankel_table,
    riccati_h,
    riccati_h_prime,
    riccati_j,
    riccati_j_prime,
    riccati_y,
    riccati_y_prime,
    taylor_g,
    taylor_t,
    taylor_tables,
    tilde_j,
    tilde_j_table,
    tilde_y,
    tilde_y_table,
)


def random_points(rng, n, scale=8.0):
    z = rng.uniform(-scale, scale, n) + 1j * rng.uniform(-3, 3, n)
    return z[np.abs(z) > 1e-3]


def richardson_derivative(f, x0, n, h, levels=3):
    """n-th derivative by central differences, Richardson-extrapolated in h**2."""

    def central(step):
        total = 0j
        for k in range(n + 1):
            total += (-1) ** k * math.comb(n, k) * f(x0 + (n / 2 - k) * step)
        return total / step**n

    table = [central(h / 2**i) for i in range(levels)]
    for level in range(1, levels):
        factor = 4.0**level
        table = [(factor * table[i + 1] - table[i]) / (factor - 1) for i in range(len(table) - 1)]
    return table[0]


# -- closed forms and an independent library -----------------------------------


def test_low_order_closed_forms():
    z = np.array([0.3, 1.7 + 0.4j, -2.5 + 1j, 12.0 - 2j])
    assert np.allclose(riccati_j(0, z), np.sin(z), rtol=1e-14)
    assert np.allclose(riccati_y(0, z), -np.cos(z), rtol=1e-14)
    assert np.allclose(riccati_h(+1, 0, z), -1j * np.exp(1j * z), rtol=1e-14)
    assert np.allclose(riccati_h(-1, 0, z), 1j * np.exp(-1j * z), rtol=1e-14)
    assert np.allclose(riccati_j(1, z), np.sin(z) / z - np.cos(z), rtol=1e-13)
    assert np.allclose(riccati_y(1, z), -np.cos(z) / z - np.sin(z), rtol=1e-13)


@pytest.mark.parametrize("l", range(0, 9))
def test_against_scipy_spherical_functions(l, rng):
    z = random_points(rng, 200)
    ref_j = z * spherical_jn(l, z)
    ref_y = z * spherical_yn(l, z)
    assert np.allclose(riccati_j(l, z), ref_j, rtol=1e-10, atol=1e-13)
    assert np.allclose(riccati_y(l, z), ref_y, rtol=1e-10, atol=1e-13)


def test_scalar_in_scalar_out():
    assert isinstance(riccati_j(2, 1.3), complex)
    assert isinstance(tilde_y(1, 0.5, 2.0), complex)


def test_singular_points_raise():
    with pytest.raises(ValueError):
        riccati_y(1, 0.0)
    with pytest.raises(ValueError):
        riccati_h(+1, 0, 0.0)
    with pytest.raises(ValueError):
        riccati_j(-1, 1.0)
    with pytest.raises(ValueError):
        riccati_j(0, complex("inf"))
    with pytest.raises(ValueError):
        tilde_y(2, 1.0, 0.0)
    assert riccati_j(3, 0.0) == 0
    assert riccati_y(0, 0.0) == -1


# -- identities -------------------------------------------------------------------


def test_wronskian_and_hankel_identity_1000_points(rng):
    z = random_points(rng, 1100)[:1000]
    assert z.size == 1000
    for l in (0, 1, 2, 3, 5):
        j, y = riccati_j(l, z), riccati_y(l, z)
        jp, yp = riccati_j_prime(l, z), riccati_y_prime(l, z)
        assert np.max(np.abs(j * yp - jp * y - 1.0)) < 1e-10
        assert np.max(np.abs(riccati_h(+1, l, z) - (j + 1j * y)) / (1 + np.abs(j) + np.abs(y))) < 1e-10
        assert np.max(np.abs(riccati_h(-1, l, z) - (j - 1j * y)) / (1 + np.abs(j) + np.abs(y))) < 1e-10


def test_hankel_derivative_consistent(rng):
    z = random_points(rng, 50)
    for l in (0, 2):
        hp = riccati_h_prime(+1, l, z)
        assert np.allclose(hp, riccati_j_prime(l, z) + 1j * riccati_y_prime(l, z), rtol=1e-10, atol=1e-12)


def test_negative_orders_satisfy_the_recurrence(rng):
    # u_{l+1} = (2l+1)/z u_l - u_{l-1} must hold through l = 0, -1, -2, ...
    z = random_points(rng, 100)
    for l in range(-4, 4):
        lhs = riccati_y(l + 1, z)
        rhs = (2 * l + 1) / z * riccati_y(l, z) - riccati_y(l - 1, z)
        assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9)
    assert np.allclose(riccati_y(-1, z), np.sin(z), rtol=1e-13)
    assert np.allclose(riccati_y(-2, z), -riccati_j(1, z), rtol=1e-13)


def test_parity(rng):
    z = random_points(rng, 100)
    for l in range(5):
        assert np.allclose(riccati_j(l, -z), (-1) ** (l + 1) * riccati_j(l, z), rtol=1e-12, atol=1e-13)
        assert np.allclose(riccati_y(l, -z), (-1) ** l * riccati_y(l, z), rtol=1e-12, atol=1e-13)


def test_derivative_relations_by_finite_differences(rng):
    z = random_points(rng, 40, scale=5)
    h = 1e-5
    for l in range(4):
        f = lambda x: riccati_j(l, x) / x ** (l + 1)
        fd = (f(z + h) - f(z - h)) / (2 * h)
        assert np.allclose(fd, -riccati_j(l + 1, z) / z ** (l + 1), rtol=1e-6, atol=1e-8)
        g = lambda x: x**l * riccati_y(l, x)
        fd = (g(z + h) - g(z - h)) / (2 * h)
        assert np.allclose(fd, z**l * riccati_y(l - 1, z), rtol=1e-6, atol=1e-8)


def test_hankel_table_matches_single_orders(rng):
    z = random_points(rng, 30)
    hp, hm = hankel_table(6, z)
    for l in range(7):
        assert np.allclose(hp[..., l], riccati_h(+1, l, z), rtol=1e-12)
        assert np.allclose(hm[..., l], riccati_h(-1, l, z), rtol=1e-12)


# -- tilded forms -------------------------------------------------------------------


def test_tilde_examples():
    # closed forms: sin(kr)/k and -cos(kr)
    k, r = np.sqrt(10.0), 1.0
    assert abs(tilde_j(0, k, r) - np.sin(k) / k) < 1e-14
    assert abs(tilde_y(0, k, r) + np.cos(k)) < 1e-14
    assert abs(tilde_j(0, 0.0, 2.5) - 2.5) < 1e-15
    assert abs(tilde_j(1, 0.0, 2.0) - 2.0**2 / 3) < 1e-15
    assert abs(tilde_y(0, 0.0, 2.0) + 1.0) < 1e-15
    assert abs(tilde_y(1, 0.0, 2.0) + 1 / 2.0) < 1e-15


@given(st.floats(-6, 6), st.floats(-2, 2), st.floats(0.05, 15), st.integers(0, 4))
def test_tilde_forms_are_even_in_k(kr, ki, r, l):
    k = complex(kr, ki)
    assert np.isclose(tilde_j(l, k, r), tilde_j(l, -k, r), rtol=1e-11, atol=1e-13)
    assert np.isclose(tilde_y(l, k, r), tilde_y(l, -k, r), rtol=1e-11, atol=1e-13)


@given(st.floats(0.01, 6), st.floats(-1.5, 1.5), st.floats(0.05, 12), st.integers(0, 4))
def test_tilde_forms_match_definition(kr, ki, r, l):
    k = complex(kr, ki)
    scale = abs(riccati_j(l, k * r)) + 1e-300
    assert abs(tilde_j(l, k, r) * k ** (l + 1) - riccati_j(l, k * r)) <= 1e-10 * max(scale, 1e-3)
    yscale = abs(riccati_y(l, k * r))
    assert abs(tilde_y(l, k, r) - k**l * riccati_y(l, k * r)) <= 1e-10 * max(yscale * abs(k) ** l, 1e-3)


def test_tilde_tables_continuous_across_series_switch():
    # the series/recurrence switch sits at |kr| = order + 1
    r = 1.0
    for l in range(4):
        below = tilde_j_table(l, (l + 1) * (1 - 1e-9), r)[l]
        above = tilde_j_table(l, (l + 1) * (1 + 1e-9), r)[l]
        assert abs(below - above) < 1e-8 * abs(below)
        below = tilde_y_table(l, (l + 1) * (1 - 1e-9), r)[l]
        above = tilde_y_table(l, (l + 1) * (1 + 1e-9), r)[l]
        assert abs(below - above) < 1e-8 * abs(below)


# -- Taylor coefficients in the energy ----------------------------------------------


def _tilde_j_of_e(l, r, mu=1.0, hbar=1.0, threshold=0.0):
    return lambda e: tilde_j(l, np.sqrt(2 * mu * (e - threshold) / hbar**2 + 0j), r)


def _tilde_y_of_e(l, r, mu=1.0, hbar=1.0, threshold=0.0):
    return lambda e: tilde_y(l, np.sqrt(2 * mu * (e - threshold) / hbar**2 + 0j), r)


@pytest.mark.parametrize("l", [0, 1, 2])
@pytest.mark.parametrize("e0,r,mu", [(2.3 + 0.4j, 1.7, 1.0), (5.0, 3.0, 1.0), (-0.7 + 0.2j, 2.2, 1.8), (0.4, 0.9, 0.6)])
def test_taylor_coefficients_match_richardson(l, e0, r, mu):
    for n in range(5):
        ref_g = richardson_derivative(_tilde_j_of_e(l, r, mu), e0, n, 0.5) / math.factorial(n)
        ref_t = richardson_derivative(_tilde_y_of_e(l, r, mu), e0, n, 0.5) / math.factorial(n)
        g = taylor_g(l, n, e0, r, mu=mu)
        t = taylor_t(l, n, e0, r, mu=mu)
        assert abs(g - ref_g) <= 1e-6 * abs(ref_g) + 1e-12
        assert abs(t - ref_t) <= 1e-6 * abs(ref_t) + 1e-12


def test_taylor_series_reproduces_the_function():
    e0, r, l = 3.0 + 0.5j, 2.0, 1
    for de in (0.05, 0.1 - 0.05j):
        approx_j = sum(de**n * taylor_g(l, n, e0, r) for n in range(25))
        approx_y = sum(de**n * taylor_t(l, n, e0, r) for n in range(25))
        assert abs(approx_j - _tilde_j_of_e(l, r)(e0 + de)) < 1e-8
        assert abs(approx_y - _tilde_y_of_e(l, r)(e0 + de)) < 1e-8


def test_taylor_with_threshold_and_hbar():
    e0, r = 1.4 + 0.1j, 1.3
    f = _tilde_j_of_e(0, r, mu=2.0, hbar=0.7, threshold=0.3)
    ref = richardson_derivative(f, e0, 2, 0.1) / 2
    assert abs(taylor_g(0, 2, e0, r, mu=2.0, hbar=0.7, threshold=0.3) - ref) < 1e-6 * abs(ref)


def test_taylor_tables_match_scalar_coefficients():
    ls = np.array([0, 2])
    mus = np.array([1.0, 1.5])
    e0 = 2.0 + 0.3j
    k = np.sqrt(2 * mus * e0)
    r = 1.9
    gamma, eta = taylor_tables(ls, mus, 1.0, k, r, 4)
    for c, (l, mu) in enumerate(zip(ls, mus)):
        for n in range(5):
            assert np.isclose(gamma[n, c], taylor_g(l, n, e0, r, mu=mu), rtol=1e-12)
            assert np.isclose(eta[n, c], taylor_t(l, n, e0, r, mu=mu), rtol=1e-12)


def test_taylor_index_validation():
    with pytest.raises(ValueError):
        taylor_g(0, -1, 1.0, 1.0)
    with pytest.raises(ValueError):
        taylor_t(0, 1, 1.0, 0.0)
