"""Small-frequency kernels (K family), profile multipliers (J family) and profiles.

All multipliers are radial functions of r = |xi|, possibly times the unit
direction omega = xi / r.  Fields are evaluated in broadcasting form
``field(t, r, omega)``: ``r`` of shape S (or broadcastable to it) and
``omega`` of shape S + (n,), which serves both pointwise evaluation and
radius-by-angle quadrature grids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import FluidParams
from .solver import char_roots, exp_diff, k_family

MULTIPLIERS = ("J0", "J1", "J2", "K0", "K1", "K2", "heat_alpha", "heat_half")
VECTOR_MULTIPLIERS = ("J1", "K1")


class RegimeError(ValueError):
    """A K-family multiplier was requested where the roots are real."""


def j_family(p: FluidParams, r, t: float):
    """Radial parts (J0, J1 scalar, J2); the vector J1 is ``J1s * omega``."""
    r = np.asarray(r, dtype=float)
    wave = p.gamma * r * t
    damp = np.exp(-0.5 * p.nu * r * r * t)
    cos_minus_one = -2.0 * np.sin(0.5 * wave) ** 2
    j0 = cos_minus_one * damp / r
    j1 = -1j * np.sin(wave) * damp / r
    # cos e^{-nu r^2 t/2} - e^{-alpha r^2 t} = (cos - 1) e^{..} + (e^{..} - e^{-alpha r^2 t})
    heat_gap = 0.5 * (p.alpha - p.beta) * r * r * exp_diff(-0.5 * p.nu * r * r, -p.alpha * r * r, t).real
    j2 = (cos_minus_one * damp + heat_gap) / r
    return j0 + 0j, j1, j2 + 0j


def _radial_multiplier(mid: str, p: FluidParams, r, t: float):
    if mid in ("J0", "J1", "J2"):
        return j_family(p, r, t)[("J0", "J1", "J2").index(mid)]
    if mid == "heat_alpha":
        return np.exp(-p.alpha * r * r * t) + 0j
    if mid == "heat_half":
        return np.exp(-0.5 * p.nu * r * r * t) + 0j
    roots = char_roots(p, r)
    if np.any(np.isnan(roots.lambda_I)):
        raise RegimeError(f"{mid} is defined only for r < r* = {p.r_star:g}")
    return k_family(p, roots, r, t)[("K0", "K1", "K2").index(mid)]


def eval_multiplier(mid: str, p: FluidParams, t: float, xi):
    """Value of a multiplier at frequency points ``xi`` (shape (..., n)).

    J1 and K1 return arrays with a trailing axis of length n.
    """
    if mid not in MULTIPLIERS:
        raise ValueError(f"unknown multiplier {mid!r}")
    if not t > 0:
        raise ValueError("multipliers are evaluated at t > 0")
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 1:
        xi = xi.reshape(-1, 1) if p.n == 1 else xi.reshape(1, -1)
    r = np.linalg.norm(xi, axis=-1)
    if np.any(r == 0):
        raise ValueError("multipliers are evaluated at xi != 0")
    m = _radial_multiplier(mid, p, r, t)
    if mid in VECTOR_MULTIPLIERS:
        return m[..., None] * (xi / r[..., None])
    return m


def radial_multiplier(mid: str, p: FluidParams, r, t: float):
    """Scalar radial part of a multiplier as a function of r."""
    if mid not in MULTIPLIERS:
        raise ValueError(f"unknown multiplier {mid!r}")
    return _radial_multiplier(mid, p, np.asarray(r, dtype=float), t)


def multiplier_gap(id_k: str, id_j: str, p: FluidParams, t: float, r) -> np.ndarray:
    """|K - J| at radius r; for index 1 the norm of the vector difference."""
    if id_k not in ("K0", "K1", "K2") or id_j not in ("J0", "J1", "J2"):
        raise ValueError("multiplier_gap compares a K multiplier with a J multiplier")
    r = np.asarray(r, dtype=float)
    if t == 0:
        return np.zeros_like(r)
    return np.abs(radial_multiplier(id_k, p, r, t) - radial_multiplier(id_j, p, r, t))


@dataclass(frozen=True)
class ProfileField:
    """An asymptotic profile in frequency space.

    ``kind`` is one of first_order_rho, first_order_v, second_order_rho,
    second_order_v; ``moments`` holds the P or Q data the profile uses.
    """

    kind: str
    moments: dict
    n: int
    evaluator: Callable

    @property
    def is_vector(self) -> bool:
        return self.kind.endswith("_v")

    def grid(self, t: float, r, omega):
        return self.evaluator(t, np.asarray(r, dtype=float), np.asarray(omega, dtype=float))

    def __call__(self, t: float, xi):
        xi = np.asarray(xi, dtype=float)
        if xi.ndim == 1:
            xi = xi.reshape(-1, 1) if self.n == 1 else xi.reshape(1, -1)
        r = np.linalg.norm(xi, axis=-1)
        return self.grid(t, r, xi / r[..., None])


def profile_first_order(d, p: FluidParams):
    """Profiles rho~ = J0 P_rho + J1.P_v and v~ = J1 P_rho + J2 omega(omega.P_v)."""
    th = d.thresholds
    p_rho, p_v = th.p_rho, th.p_v

    def rho(t, r, omega):
        j0, j1, _ = j_family(p, r, t)
        return j0 * p_rho + j1 * (omega @ p_v)

    def vel(t, r, omega):
        _, j1, j2 = j_family(p, r, t)
        return (j1 * p_rho)[..., None] * omega + (j2 * (omega @ p_v))[..., None] * omega

    moments = {"p_rho": p_rho, "p_v": p_v}
    return (
        ProfileField("first_order_rho", moments, d.n, rho),
        ProfileField("first_order_v", moments, d.n, vel),
    )


def profile_second_order(d, p: FluidParams):
    """Profiles built from the first moments Q of the |D|-data.

    Under the transform convention exp(-i x.xi) the linear part of g_hat is
    -i xi.Q, hence the factor -i in front of every Q term.
    """
    th = d.thresholds
    q_rho, q_v = th.q_rho, th.q_v

    def rho(t, r, omega):
        damp = np.exp(-0.5 * p.nu * r * r * t)
        _, j1, _ = j_family(p, r, t)
        # sum_k omega_k (omega . Q_k)
        vq = np.sum(omega * (omega @ q_v.T), axis=-1)
        return -1j * (np.cos(p.gamma * r * t) * damp * (omega @ q_rho) + j1 * r * vq)

    def vel(t, r, omega):
        _, j1, j2 = j_family(p, r, t)
        heat = np.exp(-p.alpha * r * r * t)
        oq = omega @ q_v.T  # component k: omega . Q_k
        vq = np.sum(omega * oq, axis=-1)
        return -1j * (
            (j1 * r * (omega @ q_rho))[..., None] * omega
            + heat[..., None] * oq
            + (j2 * r * vq)[..., None] * omega
        )

    moments = {"q_rho": q_rho, "q_v": q_v}
    return (
        ProfileField("second_order_rho", moments, d.n, rho),
        ProfileField("second_order_v", moments, d.n, vel),
    )
