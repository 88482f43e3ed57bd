"""Closed-form generator family and initial data built from it.

A generator ``g`` stands for one of |D| rho0, |D| v0^(k).  Every member has
an exact Fourier transform

    g_hat(xi) = int exp(-i x.xi) g(x) dx,

exact moments ``P = int g`` and ``Q = int x g``, and weighted L^1 norms that
are either exact or certified upper bounds.  With this sign convention the
first-order Taylor expansion at the origin reads ``g_hat = P - i xi.Q + E``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from math import comb
from typing import Sequence

import numpy as np

from .core import (
    Thresholds,
    radial_gaussian_moment,
    sphere_abs_moment,
    sphere_measure,
    thresholds_of,
)

# exp(-40) is far below double precision relative to the peak.
_TAIL = 40.0

MODES = ("dot_H11", "direct")


def _as_points(xi, n):
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0 or xi.shape[-1] != n:
        if n == 1 and xi.ndim <= 1:
            xi = xi.reshape(-1, 1) if xi.ndim == 1 else xi.reshape(1, 1)
        else:
            raise ValueError(f"points must have trailing dimension {n}")
    return xi


def _sq_norm(xi):
    return np.einsum("...i,...i->...", xi, xi)


class Generator:
    """Base class of the catalog; subclasses are immutable."""

    n: int

    def ft(self, xi) -> np.ndarray:
        raise NotImplementedError

    def value(self, x) -> np.ndarray:
        raise NotImplementedError

    @property
    def P(self) -> float:
        raise NotImplementedError

    @property
    def Q(self) -> np.ndarray:
        raise NotImplementedError

    def weighted_norm(self, s: int) -> tuple[float, bool]:
        """(value, exact) of int (1+|x|)^s |g|; inexact values are upper bounds."""
        raise NotImplementedError

    def freq_radius(self) -> float:
        """Frequency radius past which |g_hat| is below exp(-40) of its scale."""
        raise NotImplementedError

    def space_radius(self) -> float:
        raise NotImplementedError

    def centers(self) -> list:
        raise NotImplementedError

    def atoms(self) -> list:
        """Flatten to ``[(coef, atom, offset), ...]`` with Gaussian-type atoms."""
        raise NotImplementedError

    def max_shift(self) -> float:
        return max((float(np.linalg.norm(c)) for c in self.centers()), default=0.0)

    def is_zero(self) -> bool:
        return all(c == 0 or a.amplitude == 0 for c, a, _ in self.atoms())

    # small conveniences
    def __add__(self, other):
        return combine([1.0, 1.0], [self, other])

    def __rmul__(self, c):
        return scale(self, c)

    def __neg__(self):
        return scale(self, -1.0)


@dataclass(frozen=True)
class Gaussian(Generator):
    n: int
    width: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError(f"width must be positive, got {self.width}")

    @property
    def _mass(self) -> float:
        return self.amplitude * (self.width * math.sqrt(math.pi)) ** self.n

    def ft(self, xi):
        xi = _as_points(xi, self.n)
        r2 = _sq_norm(xi)
        return (self._mass * np.exp(-0.25 * self.width**2 * r2)).astype(complex)

    def value(self, x):
        x = _as_points(x, self.n)
        return self.amplitude * np.exp(-np.sum(x * x, axis=-1) / self.width**2)

    @property
    def P(self):
        return self._mass

    @property
    def Q(self):
        return np.zeros(self.n)

    def weighted_norm(self, s):
        rad = sum(comb(s, m) * radial_gaussian_moment(m + self.n - 1, self.width) for m in range(s + 1))
        return abs(self.amplitude) * sphere_measure(self.n) * rad, True

    def freq_radius(self):
        return 2.0 * math.sqrt(_TAIL) / self.width

    def space_radius(self):
        return math.sqrt(_TAIL) * self.width

    def centers(self):
        return [np.zeros(self.n)]

    def atoms(self):
        return [(1.0, self, np.zeros(self.n))]


@dataclass(frozen=True)
class MonomialGaussian(Generator):
    """a * x_axis * exp(-|x|^2 / w^2); ``axis`` is 1-based."""

    n: int
    axis: int = 1
    width: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        if not 1 <= self.axis <= self.n:
            raise IndexError(f"axis {self.axis} out of range for n={self.n}")
        if not self.width > 0:
            raise ValueError(f"width must be positive, got {self.width}")

    @property
    def _q(self) -> float:
        return self.amplitude * (self.width * math.sqrt(math.pi)) ** self.n * self.width**2 / 2.0

    def ft(self, xi):
        xi = _as_points(xi, self.n)
        r2 = _sq_norm(xi)
        return -1j * self._q * xi[..., self.axis - 1] * np.exp(-0.25 * self.width**2 * r2)

    def value(self, x):
        x = _as_points(x, self.n)
        return self.amplitude * x[..., self.axis - 1] * np.exp(-np.sum(x * x, axis=-1) / self.width**2)

    @property
    def P(self):
        return 0.0

    @property
    def Q(self):
        q = np.zeros(self.n)
        q[self.axis - 1] = self._q
        return q

    def weighted_norm(self, s):
        rad = sum(comb(s, m) * radial_gaussian_moment(m + self.n, self.width) for m in range(s + 1))
        return abs(self.amplitude) * sphere_abs_moment(self.n) * rad, True

    def freq_radius(self):
        return 2.0 * math.sqrt(_TAIL + 5.0) / self.width

    def space_radius(self):
        return math.sqrt(_TAIL + 5.0) * self.width

    def centers(self):
        return [np.zeros(self.n)]

    def atoms(self):
        return [(1.0, self, np.zeros(self.n))]


@dataclass(frozen=True)
class Shifted(Generator):
    base: Generator
    offset: tuple

    def __post_init__(self):
        off = tuple(float(a) for a in np.atleast_1d(self.offset))
        if len(off) != self.base.n:
            raise ValueError(f"shift of length {len(off)} for dimension {self.base.n}")
        object.__setattr__(self, "offset", off)

    @property
    def n(self):
        return self.base.n

    @property
    def _a(self):
        return np.array(self.offset)

    def ft(self, xi):
        xi = _as_points(xi, self.n)
        return np.exp(-1j * (xi @ self._a)) * self.base.ft(xi)

    def value(self, x):
        x = _as_points(x, self.n)
        return self.base.value(x - self._a)

    @property
    def P(self):
        return self.base.P

    @property
    def Q(self):
        return self.base.Q + self._a * self.base.P

    def weighted_norm(self, s):
        base, exact = self.base.weighted_norm(s)
        shift = float(np.linalg.norm(self._a))
        if shift == 0.0:
            return base, exact
        # 1 + |x + a| <= (1 + |x|)(1 + |a|)
        return (1.0 + shift) ** s * base, s == 0 and exact

    def freq_radius(self):
        return self.base.freq_radius()

    def space_radius(self):
        return self.base.space_radius()

    def centers(self):
        return [c + self._a for c in self.base.centers()]

    def atoms(self):
        return [(c, atom, off + self._a) for c, atom, off in self.base.atoms()]


@dataclass(frozen=True)
class Scaled(Generator):
    base: Generator
    factor: float

    @property
    def n(self):
        return self.base.n

    def ft(self, xi):
        return self.factor * self.base.ft(xi)

    def value(self, x):
        return self.factor * self.base.value(x)

    @property
    def P(self):
        return self.factor * self.base.P

    @property
    def Q(self):
        return self.factor * self.base.Q

    def weighted_norm(self, s):
        val, exact = self.base.weighted_norm(s)
        return abs(self.factor) * val, exact

    def freq_radius(self):
        return self.base.freq_radius()

    def space_radius(self):
        return self.base.space_radius()

    def centers(self):
        return self.base.centers()

    def atoms(self):
        return [(self.factor * c, atom, off) for c, atom, off in self.base.atoms()]


@dataclass(frozen=True)
class Sum(Generator):
    coeffs: tuple
    terms: tuple

    def __post_init__(self):
        if not self.terms:
            raise ValueError("combine needs at least one generator")
        if len(self.coeffs) != len(self.terms):
            raise ValueError("coefficient and generator lists differ in length")
        dims = {g.n for g in self.terms}
        if len(dims) != 1:
            raise ValueError(f"generators of mixed dimensions {sorted(dims)}")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        object.__setattr__(self, "terms", tuple(self.terms))

    @property
    def n(self):
        return self.terms[0].n

    def ft(self, xi):
        return sum(c * g.ft(xi) for c, g in zip(self.coeffs, self.terms))

    def value(self, x):
        return sum(c * g.value(x) for c, g in zip(self.coeffs, self.terms))

    @property
    def P(self):
        return float(sum(c * g.P for c, g in zip(self.coeffs, self.terms)))

    @property
    def Q(self):
        return sum(c * g.Q for c, g in zip(self.coeffs, self.terms))

    def weighted_norm(self, s):
        parts = [(abs(c), g.weighted_norm(s)) for c, g in zip(self.coeffs, self.terms)]
        live = [(c, v, e) for c, (v, e) in parts if c != 0 and v != 0]
        total = sum(c * v for c, v, _ in live)
        return total, len(live) == 0 or (len(live) == 1 and live[0][2])

    def freq_radius(self):
        return max(g.freq_radius() for g in self.terms)

    def space_radius(self):
        return max(g.space_radius() for g in self.terms)

    def centers(self):
        return [c for g in self.terms for c in g.centers()]

    def atoms(self):
        return [(k * c, atom, off) for k, g in zip(self.coeffs, self.terms) for c, atom, off in g.atoms()]


def make_gaussian(n: int, width: float = 1.0, amplitude: float = 1.0) -> Gaussian:
    """a * exp(-|x|^2 / w^2) in R^n."""
    return Gaussian(int(n), float(width), float(amplitude))


def make_monomial_gaussian(n: int, axis: int = 1, width: float = 1.0, amplitude: float = 1.0) -> MonomialGaussian:
    """a * x_axis * exp(-|x|^2 / w^2); odd in x_axis, so P = 0."""
    return MonomialGaussian(int(n), int(axis), float(width), float(amplitude))


def zero(n: int) -> Gaussian:
    return Gaussian(int(n), 1.0, 0.0)


def shift(g: Generator, a) -> Generator:
    """g(x - a)."""
    return Shifted(g, tuple(np.atleast_1d(np.asarray(a, dtype=float))))


def scale(g: Generator, s: float) -> Generator:
    return Scaled(g, float(s))


def combine(coeffs: Sequence[float], gs: Sequence[Generator]) -> Generator:
    """Linear combination sum_i coeffs[i] * gs[i]."""
    return Sum(tuple(coeffs), tuple(gs))


def moment_expansion_remainder(g: Generator, xi) -> np.ndarray:
    """E_g(xi) = g_hat(xi) - P_g + i xi.Q_g, second order at the origin."""
    xi = _as_points(xi, g.n)
    return g.ft(xi) - g.P + 1j * (xi @ g.Q)


@dataclass(frozen=True)
class InitialDatum:
    """Initial density/velocity given through generators of |D| rho0 and |D| v0.

    In ``dot_H11`` mode rho0_hat = g_hat / |xi|; in ``direct`` mode
    rho0_hat = g_hat.
    """

    mode: str
    g_rho: Generator
    g_v: tuple
    thresholds: Thresholds = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        g_v = tuple(self.g_v)
        n = self.g_rho.n
        if len(g_v) != n:
            raise ValueError(f"expected {n} velocity generators, got {len(g_v)}")
        if any(g.n != n for g in g_v):
            raise ValueError("velocity generators do not match the dimension of g_rho")
        object.__setattr__(self, "g_v", g_v)
        object.__setattr__(self, "thresholds", thresholds_of(self))

    @property
    def n(self) -> int:
        return self.g_rho.n

    def _g_v_hat(self, xi):
        out = np.zeros(xi.shape, dtype=complex)
        for k, g in enumerate(self.g_v):
            if not g.is_zero():
                out[..., k] = g.ft(xi)
        return out

    def d_rho(self, xi):
        """Symbol of |D| rho0, i.e. |xi| rho0_hat(xi)."""
        xi = _as_points(xi, self.n)
        g = self.g_rho.ft(xi) if not self.g_rho.is_zero() else np.zeros(xi.shape[:-1], dtype=complex)
        return g if self.mode == "dot_H11" else np.linalg.norm(xi, axis=-1) * g

    def d_v(self, xi):
        xi = _as_points(xi, self.n)
        g = self._g_v_hat(xi)
        return g if self.mode == "dot_H11" else np.linalg.norm(xi, axis=-1)[..., None] * g

    def rho0_hat(self, xi):
        xi = _as_points(xi, self.n)
        g = self.g_rho.ft(xi)
        return g / np.linalg.norm(xi, axis=-1) if self.mode == "dot_H11" else g

    def v0_hat(self, xi):
        xi = _as_points(xi, self.n)
        g = self._g_v_hat(xi)
        return g / np.linalg.norm(xi, axis=-1)[..., None] if self.mode == "dot_H11" else g

    def linear_rho(self, xi):
        """First-order Taylor part -i xi.Q of |D| rho0 (zero-mean data)."""
        xi = _as_points(xi, self.n)
        return -1j * (xi @ self.thresholds.q_rho)

    def linear_v(self, xi):
        xi = _as_points(xi, self.n)
        return -1j * (xi @ self.thresholds.q_v.T)

    def generators(self) -> list:
        return [self.g_rho, *self.g_v]

    def freq_radius(self) -> float:
        return max(g.freq_radius() for g in self.generators() if not g.is_zero()) if not self.is_zero() else 0.0

    def max_shift(self) -> float:
        return max(g.max_shift() for g in self.generators())

    def is_zero(self) -> bool:
        return all(g.is_zero() for g in self.generators())

    def scaled(self, s: float) -> "InitialDatum":
        return InitialDatum(self.mode, scale(self.g_rho, s), tuple(scale(g, s) for g in self.g_v))

    def l1_scale(self) -> float:
        return self.thresholds.scale


def build_datum(mode: str, g_rho: Generator, g_v: Sequence[Generator] | None = None) -> InitialDatum:
    """Assemble an initial datum; ``g_v=None`` means zero velocity."""
    if g_v is None:
        g_v = [zero(g_rho.n) for _ in range(g_rho.n)]
    return InitialDatum(mode, g_rho, tuple(g_v))
