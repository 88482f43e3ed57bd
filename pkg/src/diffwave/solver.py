"""Characteristic roots and the exact Fourier-space solution.

Transformed system, with xi in R^n and r = |xi|:

    rho_t + i gamma xi.v = 0
    v_t + alpha r^2 v + beta xi (xi.v) + i gamma xi rho = 0

The roots lam_+- of lam^2 + (alpha+beta) r^2 lam + gamma^2 r^2 = 0 drive
everything through the divided difference E = (e^{lam_+ t} - e^{lam_- t}) /
(lam_+ - lam_-), evaluated by :func:`exp_diff` so the formulas stay valid
when the roots coincide.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import FluidParams

DEGENERATE_BAND = 1e-9


@dataclass(frozen=True)
class CharRoots:
    lambda_plus: np.ndarray
    lambda_minus: np.ndarray
    regime: np.ndarray
    lambda_R: np.ndarray
    lambda_I: np.ndarray
    # (lam_+ - lam_-) / 2: i lambda_I below r*, real above.
    half_gap: np.ndarray

    def item(self):
        """Scalar view for a single radius."""
        return CharRoots(*(np.asarray(x).reshape(-1)[0] for x in (
            self.lambda_plus, self.lambda_minus, self.regime,
            self.lambda_R, self.lambda_I, self.half_gap)))


def char_roots(p: FluidParams, r) -> CharRoots:
    """Roots of lam^2 + (alpha+beta) r^2 lam + gamma^2 r^2 = 0 with regime labels."""
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise ValueError("char_roots requires r > 0")
    nu, g = p.nu, p.gamma
    half_b = 0.5 * nu * r * r
    # discriminant r^2 (nu r/2 - gamma)(nu r/2 + gamma), factored for accuracy near r*
    fac = (0.5 * nu * r - g) * (0.5 * nu * r + g)
    osc = fac <= 0

    lam_I = np.where(osc, r * np.sqrt(np.where(osc, -fac, 0.0)), np.nan)
    lam_R = np.where(osc, -half_b, np.nan)
    s = r * np.sqrt(np.where(osc, 0.0, fac))
    lam_m_real = -half_b - s
    with np.errstate(divide="ignore", invalid="ignore"):
        lam_p_real = np.where(osc, 0.0, g * g * r * r / np.where(osc, -1.0, lam_m_real))

    lam_p = np.where(osc, -half_b + 1j * np.nan_to_num(lam_I), lam_p_real + 0j)
    lam_m = np.where(osc, -half_b - 1j * np.nan_to_num(lam_I), lam_m_real + 0j)
    half_gap = np.where(osc, 1j * np.nan_to_num(lam_I), s + 0j)

    rs = p.r_star
    regime = np.where(
        np.abs(r - rs) <= DEGENERATE_BAND * rs,
        "degenerate",
        np.where(r < rs, "oscillatory", "overdamped"),
    )
    return CharRoots(lam_p, lam_m, regime, lam_R, lam_I, half_gap)


def phi1(z):
    """(e^z - 1) / z with the removable singularity filled in."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < 1e-8
    with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
        out = np.expm1(z) / np.where(small, 1.0, z)
    return np.where(small, 1.0 + 0.5 * z, out)


def exp_diff(a, b, t):
    """(e^{a t} - e^{b t}) / (a - b), equal to t e^{a t} when a == b.

    The exponential with the larger real part is factored out, so the
    remaining phi1 argument has non-positive real part and never overflows.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("exp_diff requires t >= 0")
    swap = b.real > a.real
    hi = np.where(swap, b, a)
    lo = np.where(swap, a, b)
    out = t * np.exp(hi * t) * phi1((lo - hi) * t)
    return out[()] if out.ndim == 0 else out


def _sinc(x):
    return np.sinc(np.asarray(x) / np.pi)


@dataclass(frozen=True)
class SolutionFactors:
    """Radial factors of the solution at one time.

    rho_hat = a rho0 + B (omega . |xi| v0)
    v_hat   = h_alpha v0 + B omega |xi| rho0 + (c - h_alpha) omega (omega . v0)
    with B = -i gamma E.  ``A0 = (a - h_half)/r`` and ``A2 = (c - h_alpha)/r``
    are the heat-subtracted factors, computed without cancellation.
    """

    r: np.ndarray
    t: float
    E: np.ndarray
    a: np.ndarray
    c: np.ndarray
    B: np.ndarray
    h_half: np.ndarray
    h_alpha: np.ndarray
    A0: np.ndarray
    A2: np.ndarray


def k_family(p: FluidParams, roots: CharRoots, r, t):
    """K0, K1 (scalar part, times omega) and K2 from lambda_R, lambda_I.

    Only meaningful where the roots are a conjugate pair.
    """
    r = np.asarray(r, dtype=float)
    lam_R = roots.lambda_R
    lam_I = roots.lambda_I
    growth = np.exp(lam_R * t)
    half_angle = np.sin(0.5 * lam_I * t)
    # sin(lam_I t) / lam_I = t sinc(lam_I t)
    sin_ratio = t * _sinc(lam_I * t)
    k0 = growth * (-2.0 * half_angle**2 / r + 0.5 * p.nu * r * sin_ratio)
    k1 = -1j * p.gamma * sin_ratio * growth
    # e^{lam_R t} - e^{-alpha r^2 t} = (alpha - beta) r^2 / 2 * exp_diff(lam_R, -alpha r^2, t)
    heat_gap = 0.5 * (p.alpha - p.beta) * r * exp_diff(lam_R, -p.alpha * r * r, t).real
    k2 = growth * (-2.0 * half_angle**2 / r - 0.5 * p.nu * r * sin_ratio) + heat_gap
    return k0 + 0j, k1, k2 + 0j


def solution_factors(p: FluidParams, r, t: float) -> SolutionFactors:
    r = np.asarray(r, dtype=float)
    if t < 0:
        raise ValueError("t must be >= 0")
    roots = char_roots(p, r)
    lp, lm = roots.lambda_plus, roots.lambda_minus
    E = exp_diff(lp, lm, t)
    a = np.exp(lm * t) - lm * E
    c = np.exp(lp * t) + lm * E
    r2 = r * r
    h_half = np.exp(-0.5 * p.nu * r2 * t)
    h_alpha = np.exp(-p.alpha * r2 * t)

    # generic heat-subtracted forms: e^{x t} - e^{y t} = (x - y) exp_diff(x, y, t)
    A0 = (-roots.half_gap * exp_diff(lm, -0.5 * p.nu * r2, t) - lm * E) / r
    A2 = ((lp + p.alpha * r2) * exp_diff(lp, -p.alpha * r2, t) + lm * E) / r
    osc = ~np.isnan(roots.lambda_I)
    if np.any(osc):
        k0, _, k2 = k_family(p, roots, r, t)
        A0 = np.where(osc, k0, A0)
        A2 = np.where(osc, k2, A2)
    return SolutionFactors(r, t, E, a, c, -1j * p.gamma * E, h_half, h_alpha, A0, A2)


def _split(xi, n):
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 1 and n == 1:
        xi = xi.reshape(-1, 1)
    if xi.ndim == 1:
        xi = xi.reshape(1, -1)
    if xi.shape[-1] != n:
        raise ValueError(f"frequency points must have {n} components")
    r = np.linalg.norm(xi, axis=-1)
    if np.any(r == 0):
        raise ValueError("xi = 0 is excluded (rho0_hat may be singular there)")
    return xi, r


def rho_hat(p: FluidParams, d, t: float, xi):
    """Density transform at time t for frequency points xi (shape (..., n))."""
    xi, r = _split(xi, d.n)
    f = solution_factors(p, r, t)
    xv = np.sum(xi * d.v0_hat(xi), axis=-1)
    return f.a * d.rho0_hat(xi) - 1j * p.gamma * f.E * xv


def v_hat(p: FluidParams, d, t: float, xi):
    """Velocity transform at time t, shape (..., n)."""
    xi, r = _split(xi, d.n)
    f = solution_factors(p, r, t)
    v0 = d.v0_hat(xi)
    xv = np.sum(xi * v0, axis=-1)
    return (
        f.h_alpha[..., None] * v0
        - 1j * p.gamma * (f.E * d.rho0_hat(xi))[..., None] * xi
        + ((f.c - f.h_alpha) * xv / (r * r))[..., None] * xi
    )


def system_residual(p: FluidParams, d, t: float, xi):
    """Max violation of the transformed system and of the damped wave equation.

    Time derivatives are exact: d/dt E = c, d/dt c = (lp+lm) c - lp lm E,
    d/dt a = -lp lm E; these hold for any pair of distinct or equal
    exponents, so the residual measures the roots and the representation.
    """
    if not t > 0:
        raise ValueError("system_residual requires t > 0")
    xi, r = _split(xi, d.n)
    roots = char_roots(p, r)
    lp, lm = roots.lambda_plus, roots.lambda_minus
    E = exp_diff(lp, lm, t)
    c = np.exp(lm * t) + lp * E
    s, q = lp + lm, lp * lm
    dc = s * c - q * E
    a = np.exp(lm * t) - lm * E
    da = -q * E
    dda = -q * c
    r2 = r * r
    h = np.exp(-p.alpha * r2 * t)
    dh = -p.alpha * r2 * h

    rho0 = d.rho0_hat(xi)
    v0 = d.v0_hat(xi)
    xv0 = np.sum(xi * v0, axis=-1)
    g = p.gamma

    rho = a * rho0 - 1j * g * E * xv0
    drho = da * rho0 - 1j * g * c * xv0
    ddrho = dda * rho0 - 1j * g * dc * xv0
    proj = (xv0 / r2)[..., None] * xi
    v = h[..., None] * v0 - 1j * g * (E * rho0)[..., None] * xi + (c - h)[..., None] * proj
    dv = dh[..., None] * v0 - 1j * g * (c * rho0)[..., None] * xi + (dc - dh)[..., None] * proj

    xv = np.sum(xi * v, axis=-1)
    res_mass = np.abs(drho + 1j * g * xv)
    res_mom = np.abs(
        dv + p.alpha * r2[..., None] * v + p.beta * xv[..., None] * xi + 1j * g * rho[..., None] * xi
    ).max(axis=-1)
    res_wave = np.abs(ddrho + g * g * r2 * rho + p.nu * r2 * drho)
    out = np.maximum(np.maximum(res_mass, res_mom), res_wave)
    return float(out[0]) if out.size == 1 else out


@dataclass(frozen=True)
class FrequencyWindow:
    """Sharp partition of frequency space into interior, bounded and exterior zones."""

    eps0: float
    n0: float
    selector: str = "all"

    def __post_init__(self):
        if not 0 < self.eps0 < self.n0:
            raise ValueError("need 0 < eps0 < n0")
        if self.selector not in ("interior", "bounded", "exterior", "all"):
            raise ValueError(f"unknown window selector {self.selector!r}")

    @classmethod
    def default(cls, p: FluidParams, selector: str = "all") -> "FrequencyWindow":
        return cls(min(1.0, p.gamma / p.nu), max(2.0, 4.0 * p.gamma / p.nu), selector)

    def select(self, selector: str) -> "FrequencyWindow":
        return FrequencyWindow(self.eps0, self.n0, selector)

    def interval(self, r_max: float) -> tuple:
        lo, hi = {
            "interior": (0.0, self.eps0),
            "bounded": (self.eps0, self.n0),
            "exterior": (self.n0, np.inf),
            "all": (0.0, np.inf),
        }[self.selector]
        return lo, min(hi, r_max)

    def breaks(self):
        return (self.eps0, self.n0)
