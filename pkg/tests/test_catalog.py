import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from diffwave import (
    build_datum,
    combine,
    make_gaussian,
    make_monomial_gaussian,
    moment_expansion_remainder,
    scale,
    shift,
    weighted_l1_norm,
    zero,
)


def _numeric_ft_1d(g, xi):
    """Oracle: g_hat(xi) = int exp(-i x xi) g(x) dx by adaptive quadrature."""
    f = lambda x: float(g.value(np.array([[x]]))[0])
    re = integrate.quad(lambda x: f(x) * math.cos(x * xi), -12, 12, limit=400, epsabs=1e-13, points=[-0.7, 0.0, 1.1])[0]
    im = integrate.quad(lambda x: -f(x) * math.sin(x * xi), -12, 12, limit=400, epsabs=1e-13, points=[-0.7, 0.0, 1.1])[0]
    return complex(re, im)


@pytest.mark.parametrize(
    "g",
    [
        make_gaussian(1, 0.8, 1.7),
        make_monomial_gaussian(1, 1, 1.3, -0.6),
        shift(make_monomial_gaussian(1, 1, 0.9), [1.1]),
        combine([2.0, -0.5], [make_gaussian(1), shift(make_gaussian(1, 0.5), [-0.7])]),
    ],
)
def test_fourier_transform_convention_against_quadrature(g):
    for xi in (0.0, 0.37, -1.2, 3.0):
        assert complex(g.ft(np.array([[xi]]))[0]) == pytest.approx(_numeric_ft_1d(g, xi), abs=1e-10)


def test_gaussian_ft_examples():
    g = make_gaussian(1)
    assert g.ft(np.array([[0.0]]))[0] == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert g.ft(np.array([[2.0]]))[0] == pytest.approx(math.sqrt(math.pi) * math.exp(-1), rel=1e-15)
    g3 = make_gaussian(3, 2.0, 0.5)
    assert g3.P == pytest.approx(0.5 * (math.sqrt(math.pi) * 2) ** 3, rel=1e-15)


def test_monomial_moments_examples():
    g = make_monomial_gaussian(2, 1)
    assert g.P == 0.0
    np.testing.assert_allclose(g.Q, [math.pi / 2, 0.0], rtol=1e-15)
    g3 = make_monomial_gaussian(3, 3, 1.0, 2.0)
    np.testing.assert_allclose(g3.Q, [0.0, 0.0, math.pi**1.5], rtol=1e-15)


def test_moments_by_finite_differences(rng):
    # g_hat(0) = P and grad g_hat(0) = -i Q
    for n in (1, 2, 3):
        g = combine(
            [1.0, 0.7],
            [shift(make_monomial_gaussian(n, 1, 0.8), rng.normal(size=n) * 0.4), shift(make_gaussian(n), rng.normal(size=n))],
        )
        h = 1e-5
        assert complex(g.ft(np.zeros((1, n)))[0]) == pytest.approx(g.P, rel=1e-14)
        grad = np.array([(g.ft(h * e[None]) - g.ft(-h * e[None]))[0] / (2 * h) for e in np.eye(n)])
        np.testing.assert_allclose(grad, -1j * g.Q, atol=1e-8)


def test_shift_moves_first_moment():
    g = make_gaussian(2, 1.0, 1.0)
    a = np.array([0.5, -2.0])
    sg = shift(g, a)
    assert sg.P == pytest.approx(g.P)
    np.testing.assert_allclose(sg.Q, g.P * a, rtol=1e-14)
    x = np.array([[0.3, 0.1], [1.0, -1.0]])
    np.testing.assert_allclose(sg.value(x), g.value(x - a), rtol=1e-15)


def test_shift_errors():
    with pytest.raises(ValueError):
        shift(make_gaussian(2), [1.0])
    with pytest.raises(ValueError):
        make_gaussian(2, -1.0)
    with pytest.raises(IndexError):
        make_monomial_gaussian(2, 3)
    with pytest.raises(ValueError):
        combine([1.0], [make_gaussian(1), make_gaussian(1)])
    with pytest.raises(ValueError):
        combine([1.0, 1.0], [make_gaussian(1), make_gaussian(2)])


def test_linear_combination_is_linear(rng):
    a, b = make_gaussian(2, 0.6), shift(make_monomial_gaussian(2, 2), [0.2, 0.3])
    c = combine([1.5, -2.0], [a, b])
    xi = rng.normal(size=(20, 2))
    np.testing.assert_allclose(c.ft(xi), 1.5 * a.ft(xi) - 2.0 * b.ft(xi), rtol=1e-14, atol=1e-15)
    assert c.P == pytest.approx(1.5 * a.P - 2.0 * b.P)
    np.testing.assert_allclose(c.Q, 1.5 * a.Q - 2.0 * b.Q, rtol=1e-14, atol=1e-15)
    np.testing.assert_allclose(scale(a, 3.0).ft(xi), 3.0 * a.ft(xi), rtol=1e-15)


def test_zero_generator():
    z = zero(3)
    assert z.is_zero() and z.P == 0.0
    np.testing.assert_array_equal(z.Q, np.zeros(3))
    assert np.all(z.ft(np.ones((4, 3))) == 0)


def _random_generator(rng, n):
    gens = [shift(make_gaussian(n, rng.uniform(0.5, 1.5)), rng.normal(size=n) * 0.5),
            shift(make_monomial_gaussian(n, int(rng.integers(1, n + 1)), rng.uniform(0.5, 1.5)), rng.normal(size=n) * 0.5)]
    return combine(rng.normal(size=2), gens)


def _small_frequencies(rng, n, count):
    xi = rng.normal(size=(count, n))
    return xi * (rng.uniform(0, 1, size=count) ** 2 / np.linalg.norm(xi, axis=-1))[:, None]


@pytest.mark.parametrize("n", [1, 2, 3])
def test_expansion_bounds_at_many_frequencies(n, rng):
    # |g_hat - P| <= |xi| ||g||_{L1_1}, |g_hat - P + i xi.Q| <= |xi|^2 ||g||_{L1_2}
    for _ in range(3):
        g = _random_generator(rng, n)
        xi = _small_frequencies(rng, n, 1000)
        r = np.linalg.norm(xi, axis=-1)
        assert np.all(np.abs(g.ft(xi) - g.P) <= r * weighted_l1_norm(g, 1) * (1 + 1e-12))
        rem = moment_expansion_remainder(g, xi)
        assert np.all(np.abs(rem) <= r * r * weighted_l1_norm(g, 2) * (1 + 1e-12))


def test_remainder_is_second_order():
    g = shift(make_monomial_gaussian(2, 1), [0.3, -0.2])
    e = np.array([[0.6, 0.8]])
    ratios = [abs(moment_expansion_remainder(g, h * e)[0]) / h**2 for h in (1e-2, 5e-3, 2.5e-3)]
    assert ratios[-1] == pytest.approx(ratios[-2], rel=1e-2)


def test_datum_modes():
    g = make_gaussian(2)
    d_h = build_datum("dot_H11", g)
    d_d = build_datum("direct", g)
    xi = np.array([[0.3, 0.4]])
    assert d_h.d_rho(xi)[0] == pytest.approx(g.ft(xi)[0])
    assert d_h.rho0_hat(xi)[0] == pytest.approx(g.ft(xi)[0] / 0.5)
    assert d_d.d_rho(xi)[0] == pytest.approx(0.5 * g.ft(xi)[0])
    assert d_d.rho0_hat(xi)[0] == pytest.approx(g.ft(xi)[0])
    with pytest.raises(ValueError):
        build_datum("H1", g)
    with pytest.raises(ValueError):
        build_datum("direct", g, [zero(2)])
    with pytest.raises(ValueError):
        build_datum("direct", g, [zero(3), zero(3)])


@settings(max_examples=40)
@given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.2, 3))
def test_linear_parts_match_moments(a, b, w):
    d = build_datum("dot_H11", shift(make_monomial_gaussian(2, 2, w), [a, b]), [make_gaussian(2, w), zero(2)])
    xi = np.array([[1e-4, -2e-4]])
    np.testing.assert_allclose(d.linear_rho(xi), -1j * xi @ d.g_rho.Q, rtol=1e-14)
    np.testing.assert_allclose(d.linear_v(xi)[0, 0], -1j * (xi @ d.g_v[0].Q)[0], rtol=1e-14)
