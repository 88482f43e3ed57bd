"""Physical parameters, growth/decay envelopes, thresholds and sphere moments."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

import numpy as np
from scipy import integrate
from scipy.special import gamma as gamma_fn

if TYPE_CHECKING:
    from .catalog import Generator, InitialDatum

# b0 == 0 is decided relative to the L^1 size of the generators.
B0_GATE = 1e-12


@dataclass(frozen=True)
class FluidParams:
    """Coefficients of the linearized system: viscosities alpha, beta, sound coupling gamma."""

    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    n: int = 1

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.beta >= 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension n must be an integer >= 1, got {self.n}")

    @property
    def nu(self) -> float:
        """Total longitudinal viscosity alpha + beta."""
        return self.alpha + self.beta

    @property
    def r_star(self) -> float:
        """Radius where the characteristic roots collide, 2 gamma / (alpha + beta)."""
        return 2.0 * self.gamma / self.nu

    def with_dim(self, n: int) -> "FluidParams":
        return FluidParams(self.alpha, self.beta, self.gamma, n)


@dataclass(frozen=True)
class Envelope:
    """A time envelope: sqrt_t, sqrt_log_t, or power with exponent ``p``."""

    kind: str
    p: float = 0.0

    def __post_init__(self):
        if self.kind not in ("sqrt_t", "sqrt_log_t", "power"):
            raise ValueError(f"unknown envelope kind {self.kind!r}")

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self.kind == "sqrt_t":
            return np.sqrt(t)
        if self.kind == "sqrt_log_t":
            if np.any(t <= 1):
                raise ValueError("sqrt(ln t) envelope needs t > 1")
            return np.sqrt(np.log(t))
        return t**self.p

    @property
    def label(self) -> str:
        if self.kind == "power":
            return f"t^{self.p:g}"
        return {"sqrt_t": "sqrt(t)", "sqrt_log_t": "sqrt(ln t)"}[self.kind]

    @classmethod
    def for_dimension(cls, n: int) -> "Envelope":
        """The envelope D_n(t) of the optimal estimates."""
        if n == 1:
            return cls("sqrt_t")
        if n == 2:
            return cls("sqrt_log_t")
        return cls("power", 0.5 - n / 4.0)


def decay_function(n: int, t):
    """D_n(t): sqrt(t) for n=1, sqrt(ln t) for n=2 and t^(1/2 - n/4) for n >= 3."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be an integer >= 1, got {n}")
    t_arr = np.asarray(t, dtype=float)
    if n == 2 and np.any(t_arr <= 1):
        raise ValueError("decay_function(n=2) requires t > 1")
    if np.any(t_arr <= 0):
        raise ValueError("decay_function requires t > 0")
    out = Envelope.for_dimension(int(n))(t_arr)
    return float(out) if np.ndim(out) == 0 else out


def sphere_measure(n: int) -> float:
    """Surface measure of S^{n-1}; for n=1 the counting measure of {-1, +1}."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def sphere_quadratic_moment(n: int, j: int, k: int) -> float:
    """Integral of omega_j * omega_k over S^{n-1} (indices are 1-based)."""
    if not (1 <= j <= n and 1 <= k <= n):
        raise IndexError(f"indices ({j}, {k}) out of range for n={n}")
    return sphere_measure(n) / n if j == k else 0.0


def sphere_quartic_moment(n: int, k: int, q: Sequence[float]) -> float:
    """Closed form of the integral of omega_k^2 (omega . q)^2 over S^{n-1}.

    Equals pi^(n/2) / Gamma((n+4)/2) * (|q|^2 / 2 + q_k^2).
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (n,):
        raise ValueError(f"q must have length {n}")
    if not 1 <= k <= n:
        raise IndexError(f"index {k} out of range for n={n}")
    return math.pi ** (n / 2.0) / math.gamma((n + 4) / 2.0) * (
        0.5 * float(q @ q) + float(q[k - 1]) ** 2
    )


def sphere_abs_moment(n: int) -> float:
    """Integral of |omega_j| over S^{n-1}."""
    return 2.0 * math.pi ** ((n - 1) / 2.0) / math.gamma((n + 1) / 2.0)


def radial_gaussian_moment(k: int, w: float) -> float:
    """Integral over (0, inf) of r^k exp(-r^2/w^2) dr."""
    return 0.5 * w ** (k + 1) * gamma_fn((k + 1) / 2.0)


class QuadratureError(RuntimeError):
    """Raised when a quadrature misses its tolerance; carries the last estimates."""

    def __init__(self, message, values=None, error=None):
        super().__init__(message)
        self.values = values
        self.error = error


def weighted_l1_norm(g: "Generator", s: int, *, exact: bool = False) -> float:
    """Weighted norm int (1+|x|)^s |g(x)| dx for s in {0, 1, 2}.

    Uses the generator's closed form; generators built by shifting or
    combining only carry an upper bound, which ``exact=True`` replaces by a
    physical-space quadrature (relative tolerance 1e-8).  For n >= 2 the
    quadrature needs the kinks of |g| on coordinate planes through the atom
    centers, which holds for single shifted atoms but not for general sums.
    """
    if s not in (0, 1, 2):
        raise ValueError("s must be 0, 1 or 2")
    value, is_exact = g.weighted_norm(s)
    if is_exact or not exact:
        return value
    return _weighted_norm_quadrature(g, s)


def _weighted_norm_quadrature(g: "Generator", s: int) -> float:
    n = g.n
    reach = g.max_shift() + g.space_radius()

    if n == 1:
        kinks = {0.0} | {float(c[0]) for c in g.centers()}
        edges = sorted({-reach, reach} | {k for k in kinks if -reach < k < reach})
        f = lambda x: (1 + abs(x)) ** s * abs(float(g.value(np.array([[x]]))[0]))
        total, err = 0.0, 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            val, e = integrate.quad(f, a, b, epsabs=0, epsrel=1e-10, limit=400)
            total += val
            err += e
        if err > 1e-8 * max(total, 1e-300):
            raise QuadratureError("weighted norm quadrature did not converge", [total], err)
        return total

    # n >= 2: tensor Gauss-Legendre.  Panel edges sit on the center coordinates so
    # the kinks of |x_k - c_k| factors fall on panel boundaries, and the mesh is
    # graded geometrically towards the cone point of |x| at the origin.
    from .quadrature import gauss_legendre_panels

    grading = reach * 2.0 ** -np.arange(1, 13)
    before = prev = total = None
    for per_side in (4, 8, 16):
        axes = []
        for k in range(n):
            cuts = [float(c[k]) for c in g.centers() if -reach < c[k] < reach]
            edges = np.unique(np.concatenate([np.linspace(-reach, reach, 2 * per_side + 1), grading, -grading, [0.0], cuts]))
            axes.append(gauss_legendre_panels(edges, order=6))
        total = 0.0
        pts0, w0 = axes[0]
        rest = np.stack(np.meshgrid(*[a[0] for a in axes[1:]], indexing="ij"), axis=-1).reshape(-1, n - 1)
        wrest = np.prod(np.stack(np.meshgrid(*[a[1] for a in axes[1:]], indexing="ij"), axis=-1).reshape(-1, n - 1), axis=1)
        for x0, wx in zip(pts0, w0):
            x = np.column_stack([np.full(len(rest), x0), rest])
            rad = np.sqrt(np.einsum("ij,ij->i", x, x))
            total += wx * float(np.sum(wrest * (1 + rad) ** s * np.abs(g.value(x))))
        if prev is not None and abs(total - prev) <= 1e-8 * abs(total):
            return total
        before, prev = prev, total
    # sign changes of g off the cut planes (e.g. sums of atoms) are not resolved
    raise QuadratureError(
        f"weighted norm quadrature did not converge (last two refinements {before!r}, {total!r}); "
        "the zero set of g must lie on coordinate planes through atom centers", [before, total])


@dataclass(frozen=True)
class Thresholds:
    """Moments of (|D| rho0, |D| v0) and the derived sizes |B0|, |B1|."""

    p_rho: float
    p_v: np.ndarray
    q_rho: np.ndarray
    q_v: np.ndarray
    scale: float = 1.0
    b0: float = field(init=False)
    b1: float = field(init=False)

    def __post_init__(self):
        p_v = np.asarray(self.p_v, dtype=float)
        q_rho = np.asarray(self.q_rho, dtype=float)
        q_v = np.asarray(self.q_v, dtype=float)
        n = q_rho.shape[0]
        if p_v.shape != (n,) or q_v.shape != (n, n):
            raise ValueError("moment shapes inconsistent with dimension")
        object.__setattr__(self, "p_v", p_v)
        object.__setattr__(self, "q_rho", q_rho)
        object.__setattr__(self, "q_v", q_v)
        b0 = math.sqrt(self.p_rho**2 + float(p_v @ p_v))
        b1sq = float(q_rho @ q_rho) + float(np.sum(q_v**2)) + float(np.sum(np.diag(q_v) ** 2))
        object.__setattr__(self, "b0", b0)
        object.__setattr__(self, "b1", math.sqrt(b1sq))

    @property
    def n(self) -> int:
        return self.q_rho.shape[0]

    @property
    def b0_is_zero(self) -> bool:
        return self.b0 < B0_GATE * (1.0 + self.scale)


def thresholds_of(datum: "InitialDatum") -> Thresholds:
    """Collect P and Q moments of the |D|-data and compute |B0|, |B1|."""
    n = datum.n
    gens = [datum.g_rho, *datum.g_v]
    scale = sum(weighted_l1_norm(g, 0) for g in gens)
    if datum.mode == "direct":
        # |D| rho0 has symbol |xi| g_hat, which vanishes at the origin.
        zero_n = np.zeros(n)
        return Thresholds(0.0, zero_n, zero_n, np.zeros((n, n)), scale=scale)
    for g in gens:
        if g.P is None or g.Q is None:
            raise ValueError("generator lacks moment data")
    return Thresholds(
        p_rho=float(datum.g_rho.P),
        p_v=np.array([g.P for g in datum.g_v], dtype=float),
        q_rho=np.asarray(datum.g_rho.Q, dtype=float),
        q_v=np.array([g.Q for g in datum.g_v], dtype=float).reshape(n, n),
        scale=scale,
    )
