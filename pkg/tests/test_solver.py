import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from diffwave import (
    FluidParams,
    FrequencyWindow,
    build_datum,
    char_roots,
    exp_diff,
    make_gaussian,
    make_monomial_gaussian,
    rho_hat,
    shift,
    system_residual,
    v_hat,
)
from diffwave.solver import phi1, solution_factors

params_st = st.builds(
    FluidParams,
    st.floats(0.05, 5.0),
    st.floats(0.0, 5.0),
    st.floats(0.05, 5.0),
    st.integers(1, 3),
)


def test_roots_examples():
    p = FluidParams(1.0, 1.0, 1.0, 1)
    c = char_roots(p, np.array([0.5, 2.0]))
    np.testing.assert_allclose(c.lambda_plus, [-0.25 + 1j * math.sqrt(0.1875), -4 + math.sqrt(12)], rtol=1e-15)
    np.testing.assert_allclose(c.lambda_minus, [-0.25 - 1j * math.sqrt(0.1875), -4 - math.sqrt(12)], rtol=1e-15)
    assert list(c.regime) == ["oscillatory", "overdamped"]
    d = char_roots(p, np.array([1.0])).item()
    assert d.regime == "degenerate"
    assert d.lambda_plus == pytest.approx(-1.0, abs=1e-15)
    assert d.lambda_minus == pytest.approx(-1.0, abs=1e-15)


def test_degenerate_band_edges():
    p = FluidParams(1.0, 1.0, 1.0, 1)
    c = char_roots(p, np.array([1 - 2e-9, 1 - 0.5e-9, 1 + 0.5e-9, 1 + 2e-9]))
    assert list(c.regime) == ["oscillatory", "degenerate", "degenerate", "overdamped"]


def test_roots_reject_nonpositive_radius():
    with pytest.raises(ValueError):
        char_roots(FluidParams(), np.array([0.0, 1.0]))


@settings(max_examples=50)
@given(params_st)
def test_vieta_on_log_grid(p):
    r = np.logspace(-6, 6, 10_000)
    c = char_roots(p, r)
    s = np.abs(c.lambda_plus + c.lambda_minus + p.nu * r * r) / (p.nu * r * r)
    q = np.abs(c.lambda_plus * c.lambda_minus - p.gamma**2 * r * r) / (p.gamma**2 * r * r)
    assert s.max() < 1e-12 and q.max() < 1e-12


@settings(max_examples=50)
@given(params_st, st.floats(1e-6, 1e6))
def test_roots_have_negative_real_part(p, r):
    c = char_roots(p, np.array([r])).item()
    assert c.lambda_plus.real < 0 and c.lambda_minus.real < 0
    assert c.lambda_minus.real <= c.lambda_plus.real


def test_small_frequency_expansion():
    # lam_I = gamma r - nu^2 r^3 / (8 gamma) - nu^4 r^5 / (128 gamma^3) + O(r^7)
    p = FluidParams(0.7, 0.5, 1.3, 1)
    nu, g = p.nu, p.gamma
    for r in (1e-1, 3e-2, 1e-2):
        lam_I = char_roots(p, np.array([r])).lambda_I[0]
        rest = lam_I - (g * r - nu**2 * r**3 / (8 * g))
        assert rest / r**5 == pytest.approx(-(nu**4) / (128 * g**3), rel=0.05)


def test_large_frequency_expansion():
    # lam_+ = -gamma^2/nu - gamma^4/(nu^3 r^2) + O(r^-4); lam_- = -nu r^2 + gamma^2/nu + O(r^-2)
    p = FluidParams(0.7, 0.5, 1.3, 1)
    nu, g = p.nu, p.gamma
    for r in (1e2, 1e3):
        c = char_roots(p, np.array([r])).item()
        assert (c.lambda_plus.real + g * g / nu) * r * r == pytest.approx(-(g**4) / nu**3, rel=1e-3)
        assert c.lambda_minus.real + nu * r * r == pytest.approx(g * g / nu, rel=1e-3)


def test_phi1_and_exp_diff_examples():
    assert phi1(0.0) == 1.0
    assert phi1(1e-20) == pytest.approx(1.0, rel=1e-15)
    assert exp_diff(-1.0, -1.0, 2.0) == pytest.approx(2 * math.exp(-2), rel=1e-15)
    a = -1 + 1e-13
    assert exp_diff(a, -1.0, 1.0).real == pytest.approx(math.exp(-1) * (1 + 0.5e-13), rel=1e-12)
    assert exp_diff(-1.0, -3.0, 0.5) == pytest.approx((math.exp(-0.5) - math.exp(-1.5)) / 2, rel=1e-15)
    assert exp_diff(-1.0, -3.0, 0.0) == 0.0
    with pytest.raises(ValueError):
        exp_diff(-1.0, -2.0, -1.0)


@given(st.floats(-50, 0), st.floats(-50, 0), st.floats(0, 50), st.floats(-5, 5))
def test_exp_diff_symmetric_and_finite(x, y, t, w):
    a, b = complex(x, w), complex(y, -w)
    u, v = exp_diff(a, b, t), exp_diff(b, a, t)
    assert np.isfinite(u)
    assert abs(u - v) <= 1e-13 * max(abs(u), 1e-300)


def _ode_oracle(p, d, xi, t):
    """Integrate the transformed system with DOP853 from the initial data."""
    xi = np.asarray(xi, dtype=float)
    n = len(xi)
    y0 = np.concatenate([[d.rho0_hat(xi[None])[0]], d.v0_hat(xi[None])[0]]).astype(complex)
    r2 = xi @ xi

    def rhs(_, y):
        y = y[: n + 1] + 1j * y[n + 1:]
        rho, v = y[0], y[1:]
        xv = xi @ v
        drho = -1j * p.gamma * xv
        dv = -p.alpha * r2 * v - p.beta * xi * xv - 1j * p.gamma * xi * rho
        out = np.concatenate([[drho], dv])
        return np.concatenate([out.real, out.imag])

    sol = solve_ivp(rhs, (0, t), np.concatenate([y0.real, y0.imag]), method="DOP853", rtol=1e-12, atol=1e-14)
    y = sol.y[:, -1]
    y = y[: n + 1] + 1j * y[n + 1:]
    return y[0], y[1:]


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("mode", ["direct", "dot_H11"])
def test_exact_solution_matches_ode(n, mode, rng):
    p = FluidParams(0.8, 0.4, 1.1, n)
    d = build_datum(mode, shift(make_gaussian(n), rng.normal(size=n) * 0.3),
                    [make_monomial_gaussian(n, k + 1, 0.9) for k in range(n)])
    dirs = rng.normal(size=(4, n))
    dirs /= np.linalg.norm(dirs, axis=-1)[:, None]
    for rad, e in zip((0.3, p.r_star, 2.5, 0.05), dirs):
        xi = rad * e
        for t in (0.5, 3.0):
            rho, v = _ode_oracle(p, d, xi, t)
            scale = abs(rho) + np.abs(v).max() + 1e-300
            assert abs(rho_hat(p, d, t, xi[None])[0] - rho) <= 1e-8 * scale
            assert np.abs(v_hat(p, d, t, xi[None])[0] - v).max() <= 1e-8 * scale


def test_initial_values_recovered(rng):
    p = FluidParams(1.0, 0.3, 2.0, 2)
    d = build_datum("direct", make_gaussian(2), [make_monomial_gaussian(2, 1), make_gaussian(2, 0.5)])
    xi = rng.normal(size=(50, 2))
    np.testing.assert_allclose(rho_hat(p, d, 0.0, xi), d.rho0_hat(xi), rtol=1e-14, atol=1e-15)
    np.testing.assert_allclose(v_hat(p, d, 0.0, xi), d.v0_hat(xi), rtol=1e-14, atol=1e-15)


def test_system_residual_small_everywhere(rng):
    for n in (1, 2, 3):
        p = FluidParams(1.0, 0.5, 1.2, n)
        d = build_datum("direct", make_gaussian(n), [make_monomial_gaussian(n, k + 1) for k in range(n)])
        xi = rng.normal(size=(200, n)) * 2
        xi[0] = p.r_star * np.eye(n)[0]
        for t in (0.01, 1.0, 25.0):
            assert np.max(system_residual(p, d, t, xi)) < 1e-9
    with pytest.raises(ValueError):
        system_residual(p, d, 0.0, xi)


def test_xi_zero_rejected():
    p = FluidParams(n=2)
    d = build_datum("direct", make_gaussian(2))
    with pytest.raises(ValueError):
        rho_hat(p, d, 1.0, np.zeros((1, 2)))


@settings(max_examples=30, deadline=None)
@given(params_st, st.floats(1e-2, 1e2))
def test_factors_continuous_across_r_star(p, t):
    rs = p.r_star
    # a jump at r* would survive in the second difference; smooth variation does not
    for delta in (1e-10, 2e-9):
        r = rs * np.array([1 - delta, 1.0, 1 + delta])
        f = solution_factors(p, r, t)
        for name in ("E", "a", "c", "A0", "A2"):
            vals = getattr(f, name)
            assert np.all(np.isfinite(vals))
            second = abs(vals[0] - 2 * vals[1] + vals[2])
            assert second <= 1e-6 * (np.abs(vals).max() + math.exp(-0.5 * p.nu * rs * rs * t))


def test_heat_subtracted_factors_match_naive_where_safe(rng):
    p = FluidParams(1.0, 0.5, 1.5, 1)
    r = rng.uniform(0.2, 5.0, size=200)
    f = solution_factors(p, r, 0.7)
    np.testing.assert_allclose(f.A0, (f.a - f.h_half) / r, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(f.A2, (f.c - f.h_alpha) / r, rtol=1e-9, atol=1e-12)


def test_bounded_window_decays_exponentially():
    # sup over eps0 <= r <= n0 of the factors decays at least like exp(-c t),
    # c = min over the window of -Re lam_+ (fitted constant, margin 1 %).
    p = FluidParams(1.0, 1.0, 1.0, 2)
    w = FrequencyWindow.default(p)
    r = np.linspace(w.eps0, w.n0, 4001)
    c_min = float(np.min(-char_roots(p, r).lambda_plus.real))
    times = np.linspace(5, 60, 12)
    sups = []
    for t in times:
        f = solution_factors(p, r, t)
        sups.append(max(np.abs(f.a).max(), np.abs(f.c).max(), np.abs(f.B).max()))
    slope = np.polyfit(times, np.log(sups), 1)[0]
    assert slope <= -0.99 * c_min
    C = max(s * math.exp(c_min * t) for s, t in zip(sups, times))
    assert all(s <= C * math.exp(-c_min * t) * (1 + 1e-12) for s, t in zip(sups, times))


def test_frequency_window_api():
    p = FluidParams(1.0, 1.0, 1.0, 1)
    w = FrequencyWindow.default(p)
    assert (w.eps0, w.n0) == (0.5, 2.0)
    assert w.select("exterior").interval(10.0) == (2.0, 10.0)
    assert w.select("interior").interval(0.1) == (0.0, 0.1)
    with pytest.raises(ValueError):
        FrequencyWindow(2.0, 1.0)
    with pytest.raises(ValueError):
        w.select("middle")
