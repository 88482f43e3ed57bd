"""Quadrature rules: radial Gauss-Legendre panels and sphere rules for n <= 3."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from .core import QuadratureError, sphere_measure

# Radius where a Gaussian factor exp(-c r^2 t) drops below exp(-37) < 1e-16.
TAIL_EXPONENT = 37.0


@dataclass(frozen=True)
class QuadratureSpec:
    """Resolution controls for radial and angular integration.

    ``r_max=None`` lets the caller pick the diffusive cutoff.  Panels are
    no wider than pi / (2 omega pph) where omega is the oscillation
    frequency of the integrand (gamma t for the solution fields).
    """

    r_min: float = 0.0
    r_max: float | None = None
    panels_per_halfperiod: int = 4
    order: int = 4
    min_panels: int = 48
    circle_nodes: int = 64
    sphere_degree: int = 20
    rel_tol: float = 1e-7
    max_doublings: int = 5

    def __post_init__(self):
        if self.panels_per_halfperiod < 4:
            raise ValueError("panels_per_halfperiod must be >= 4")
        if self.circle_nodes < 64:
            raise ValueError("circle rule needs at least 64 nodes")
        if self.sphere_degree < 20:
            raise ValueError("sphere rule degree must be >= 20")
        if self.r_min < 0:
            raise ValueError("r_min must be >= 0")


@lru_cache(maxsize=None)
def _legendre(order: int):
    x, w = roots_legendre(order)
    return x, w


def gauss_legendre_panels(edges, order: int = 4):
    """Nodes and weights of composite Gauss-Legendre on consecutive ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = _legendre(order)
    left, right = edges[:-1], edges[1:]
    half = 0.5 * (right - left)
    mid = 0.5 * (right + left)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@lru_cache(maxsize=None)
def _angular_rule_cached(n: int, degree: int, circle_nodes: int):
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([1.0, 1.0])
    if n == 2:
        m = max(circle_nodes, degree + 1)
        theta = 2.0 * np.pi * (np.arange(m) + 0.5) / m
        omegas = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
        return omegas, np.full(m, 2.0 * np.pi / m)
    if n == 3:
        p = degree // 2 + 1
        z, wz = roots_legendre(p)
        m = 2 * p
        phi = 2.0 * np.pi * (np.arange(m) + 0.5) / m
        s = np.sqrt(1.0 - z * z)
        omegas = np.stack(
            [
                (s[:, None] * np.cos(phi)[None, :]).ravel(),
                (s[:, None] * np.sin(phi)[None, :]).ravel(),
                np.repeat(z, m),
            ],
            axis=-1,
        )
        weights = np.repeat(wz, m) * (2.0 * np.pi / m)
        return omegas, weights
    raise ValueError("full angular quadrature is only available for n <= 3")


def angular_rule(n: int, degree: int = 20, circle_nodes: int = 64):
    """Nodes (m, n) on S^{n-1} and weights summing to |S^{n-1}|.

    n=1 is the two-point set {+1, -1}; n=2 uses equispaced nodes; n=3 a
    Gauss-Legendre x trapezoid product rule exact to ``degree``.
    """
    omegas, weights = _angular_rule_cached(int(n), int(degree), int(circle_nodes))
    return omegas, weights


def _panel_edges(lo: float, hi: float, width: float, breaks=(), min_split: int = 1) -> np.ndarray:
    pts = sorted({lo, hi} | {b for b in breaks if lo < b < hi})
    edges = [np.array([pts[0]])]
    for a, b in zip(pts[:-1], pts[1:]):
        k = max(min_split, int(math.ceil((b - a) / width - 1e-9)))
        edges.append(np.linspace(a, b, k + 1)[1:])
    return np.concatenate(edges)


def _chunks(nodes, weights, size):
    for i in range(0, len(nodes), size):
        yield nodes[i : i + size], weights[i : i + size]


def integrate_radial(
    integrand,
    lo: float,
    hi: float,
    *,
    width: float | None = None,
    omega: float = 0.0,
    spec: QuadratureSpec = QuadratureSpec(),
    breaks=(),
    chunk: int = 4096,
    atol_ref: int | None = None,
):
    """Integrate ``integrand(r) -> array (len(r), k)`` over [lo, hi].

    Panels no wider than ``width`` (default: (hi - lo) / min_panels, capped by
    a quarter period of ``omega``), doubled until every component agrees
    with the previous level to ``spec.rel_tol``.  If ``atol_ref`` names a
    component, differences below 1e-24 times its value also count as
    converged (for quantities that vanish up to rounding).  Partial sums are
    taken in a fixed order so results do not depend on scheduling.
    """
    if hi <= lo:
        return None
    if width is None:
        width = (hi - lo) / spec.min_panels
        if omega > 0:
            width = min(width, math.pi / (2.0 * omega * spec.panels_per_halfperiod))
    prev = total = before = None
    for level in range(spec.max_doublings + 1):
        # short segments between breaks are split too, so every level refines everywhere
        edges = _panel_edges(lo, hi, width / 2**level, breaks, min_split=2**level)
        nodes, weights = gauss_legendre_panels(edges, spec.order)
        partial = []
        for r, w in _chunks(nodes, weights, chunk):
            vals = np.asarray(integrand(r))
            partial.append(w @ vals.reshape(len(r), -1))
        total = np.sum(np.array(partial), axis=0)
        if prev is not None:
            scale = np.maximum(np.abs(total), np.abs(prev))
            floor = 0.0 if atol_ref is None else 1e-24 * abs(total[atol_ref])
            if np.all(np.abs(total - prev) <= spec.rel_tol * scale + floor):
                return total
        before, prev = prev, total
    raise QuadratureError(
        f"radial quadrature did not reach rel_tol={spec.rel_tol} on [{lo:g}, {hi:g}]; "
        f"last two refinements {np.array2string(before, precision=17)} and {np.array2string(total, precision=17)}",
        values=(before, total),
    )


def diffusive_cutoff(rate: float, t: float) -> float:
    """Radius where exp(-rate r^2 t) = exp(-37)."""
    return math.sqrt(TAIL_EXPONENT / (rate * t))


def sphere_total(n: int) -> float:
    return sphere_measure(n)
