"""Quick invariant suite, run by ``diffwave selftest`` (a few seconds)."""

from __future__ import annotations

import math

import numpy as np

from .catalog import build_datum, make_gaussian, make_monomial_gaussian, moment_expansion_remainder, shift
from .core import FluidParams, sphere_quartic_moment, weighted_l1_norm
from .multipliers import eval_multiplier
from .norms import l2_norm_field, solution_norm
from .quadrature import angular_rule, diffusive_cutoff
from .solver import FrequencyWindow, char_roots, exp_diff, rho_hat, solution_factors, system_residual


def _vieta():
    p = FluidParams(1.3, 0.4, 0.8)
    r = np.logspace(-6, 6, 2000)
    c = char_roots(p, r)
    s = np.abs(c.lambda_plus + c.lambda_minus + p.nu * r * r) / (p.nu * r * r)
    q = np.abs(c.lambda_plus * c.lambda_minus - p.gamma**2 * r * r) / (p.gamma**2 * r * r)
    err = max(s.max(), q.max())
    return err < 1e-12, f"max relative Vieta error {err:.2e}"


def _exp_diff():
    a = -1 + 1e-13
    ref = math.exp(-1) * (1 + 0.5e-13)
    err = abs(exp_diff(a, -1.0, 1.0) - ref) / ref
    ok = err < 1e-12 and abs(exp_diff(-1.0, -1.0, 2.0) - 2 * math.exp(-2)) < 1e-15
    return ok, f"confluent relative error {err:.2e}"


def _residual():
    rng = np.random.default_rng(0)
    worst = 0.0
    for n in (1, 2, 3):
        p = FluidParams(1.0, 0.5, 1.2, n)
        d = build_datum("direct", shift(make_gaussian(n), rng.normal(size=n)),
                        [make_monomial_gaussian(n, k + 1) for k in range(n)])
        xi = rng.normal(size=(30, n))
        xi[0] = p.r_star * np.eye(n)[0]
        for t in (0.1, 1.0, 10.0):
            worst = max(worst, float(np.max(system_residual(p, d, t, xi))))
    return worst < 1e-9, f"max residual {worst:.2e}"


def _k_identity():
    p = FluidParams(1.0, 1.0, 1.0, 2)
    d = build_datum("dot_H11", make_gaussian(2), [make_monomial_gaussian(2, 1), make_gaussian(2, 0.7)])
    rng = np.random.default_rng(1)
    xi = rng.uniform(-0.6, 0.6, size=(200, 2))
    t = 7.0
    r = np.linalg.norm(xi, axis=-1)
    lhs = rho_hat(p, d, t, xi) - np.exp(-0.5 * p.nu * r * r * t) * d.rho0_hat(xi)
    k0 = eval_multiplier("K0", p, t, xi)
    k1 = eval_multiplier("K1", p, t, xi)
    rhs = k0 * d.d_rho(xi) + np.sum(k1 * d.d_v(xi), axis=-1)
    scale = np.abs(k0 * d.d_rho(xi)) + np.sum(np.abs(k1 * d.d_v(xi)), axis=-1)
    err = float(np.max(np.abs(lhs - rhs) / scale))
    return err < 1e-10, f"max relative error {err:.2e}"


def _gaussian_norms():
    worst = 0.0
    for n in (1, 2, 3):
        for t in (1.0, 100.0):
            c = 0.7
            val = l2_norm_field(lambda xi: np.exp(-c * np.sum(xi * xi, axis=-1) * t), n,
                                r_max=diffusive_cutoff(c, t))
            ref = (math.pi / (2 * c * t)) ** (n / 4)
            worst = max(worst, abs(val - ref) / ref)
    return worst < 1e-8, f"max relative error {worst:.2e}"


def _quartic():
    rng = np.random.default_rng(2)
    worst = 0.0
    for n in (1, 2, 3):
        om, w = angular_rule(n)
        for _ in range(5):
            q = rng.normal(size=n)
            for k in range(1, n + 1):
                direct = float(np.sum(w * om[:, k - 1] ** 2 * (om @ q) ** 2))
                closed = sphere_quartic_moment(n, k, q)
                worst = max(worst, abs(direct - closed) / abs(closed))
    return worst < 1e-8, f"max relative error {worst:.2e}"


def _moment_bounds():
    rng = np.random.default_rng(3)
    ok = True
    for n in (1, 2, 3):
        g = shift(make_monomial_gaussian(n, 1, 0.8), rng.normal(size=n) * 0.5)
        xi = rng.normal(size=(300, n))
        xi *= (rng.uniform(0, 1, size=300) / np.linalg.norm(xi, axis=-1))[:, None]
        r = np.linalg.norm(xi, axis=-1)
        ok &= bool(np.all(np.abs(g.ft(xi) - g.P) <= r * weighted_l1_norm(g, 1)))
        ok &= bool(np.all(np.abs(moment_expansion_remainder(g, xi)) <= r * r * weighted_l1_norm(g, 2)))
    return ok, "first- and second-order remainder bounds with constant 1"


def _window_additivity():
    p = FluidParams(n=2)
    d = build_datum("direct", make_gaussian(2), [make_gaussian(2, 0.5), make_monomial_gaussian(2, 2)])
    t = 0.3
    parts = [solution_norm(p, d, t, "pair", window=FrequencyWindow.default(p, s)) ** 2
             for s in ("interior", "bounded", "exterior")]
    whole = solution_norm(p, d, t, "pair", window=FrequencyWindow.default(p, "all")) ** 2
    err = abs(sum(parts) - whole) / whole
    return err < 1e-10, f"relative mismatch {err:.2e}"


def _continuity():
    p = FluidParams(1.0, 1.0, 1.0, 1)
    d = build_datum("dot_H11", make_gaussian(1))
    rs = p.r_star
    a = rho_hat(p, d, 3.0, np.array([rs * (1 - 1e-9)]))
    b = rho_hat(p, d, 3.0, np.array([rs * (1 + 1e-9)]))
    err = float(abs(a - b)[0] / abs(a)[0])
    f = solution_factors(p, np.array([rs]), 3.0)
    return err < 1e-8 and np.isfinite(f.A0).all(), f"relative jump {err:.2e}"


CHECKS = (
    ("vieta", _vieta),
    ("exp_diff", _exp_diff),
    ("system_residual", _residual),
    ("k_identity", _k_identity),
    ("gaussian_norms", _gaussian_norms),
    ("sphere_quartic", _quartic),
    ("moment_bounds", _moment_bounds),
    ("window_additivity", _window_additivity),
    ("regime_continuity", _continuity),
)


def run_selftest():
    """Run every check; returns a list of (name, passed, detail)."""
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append((name, bool(ok), detail))
    return out
