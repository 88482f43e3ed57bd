"""L^2 norms of spectral fields by radius x angle quadrature, and snapshots.

Norms are taken in frequency space, i.e. ||f||^2 = int |f(xi)|^2 dxi, without
the (2 pi)^{-n} Plancherel factor; every rate statement is insensitive to it.
"""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import FluidParams
from .multipliers import j_family
from .quadrature import (
    TAIL_EXPONENT,
    QuadratureSpec,
    angular_rule,
    diffusive_cutoff,
    integrate_radial,
    sphere_total,
)
from .solver import FrequencyWindow, solution_factors

# radial nodes x angular nodes evaluated per chunk
_CHUNK_POINTS = 1 << 18

COMPONENT_QUANTITIES = (
    "rho",
    "v",
    "rho_minus_heat",
    "v_minus_heat",
    "rho_minus_heat_minus_profile",
    "v_minus_heat_minus_profile",
    "rho_minus_profile2",
    "v_minus_profile2",
    "profile1_rho",
    "profile1_v",
    "profile2_rho",
    "profile2_v",
)
PAIR_QUANTITIES = (
    "pair",
    "pair_minus_heat",
    "pair_minus_heat_minus_profile",
    "pair_minus_profile2",
    "profile1_pair",
    "profile2_pair",
)
QUANTITIES = COMPONENT_QUANTITIES + PAIR_QUANTITIES

# quantities that keep the 1/|xi| factor of the data at the origin
_SINGULAR = {"rho", "v", "pair", "rho_minus_profile2", "v_minus_profile2", "pair_minus_profile2"}


def _dot(a, b):
    return np.einsum("...i,...i->...", a, b)


class DivergentAtOrigin(ValueError):
    """The requested combination is not square integrable near xi = 0."""


def _components(which: str):
    if which in COMPONENT_QUANTITIES:
        return (which,)
    if which == "pair":
        return ("rho", "v")
    if which.startswith("pair_"):
        rest = which[len("pair_"):]
        return ("rho_" + rest, "v_" + rest)
    if which.endswith("_pair"):
        head = which[: -len("_pair")]
        return (head + "_rho", head + "_v")
    raise ValueError(f"unknown quantity {which!r}")


def _resolve(spec, window):
    return spec if spec is not None else QuadratureSpec()


def _interval(spec: QuadratureSpec, window: FrequencyWindow | None, r_max: float):
    if spec.r_max is not None:
        r_max = min(r_max, spec.r_max)
    if window is None:
        lo, hi = 0.0, r_max
    else:
        lo, hi = window.interval(r_max)
    return max(lo, spec.r_min), hi


def _width(spec: QuadratureSpec, extent: float, omega: float) -> float:
    # panel width fixed by the full extent so that every window sees the same panels
    width = extent / spec.min_panels
    if omega > 0:
        width = min(width, math.pi / (2.0 * omega * spec.panels_per_halfperiod))
    return width


def l2_norm_radial(m, n: int, spec: QuadratureSpec | None = None, *, omega: float = 0.0,
                   r_max: float | None = None, breaks=()) -> float:
    """(|S^{n-1}| int |m(r)|^2 r^{n-1} dr)^{1/2} over [r_min, r_max].

    ``omega`` is the oscillation frequency of m in r (gamma t for the
    diffusion-wave multipliers); panels resolve a quarter period of |m|^2.
    """
    spec = _resolve(spec, None)
    hi = r_max if r_max is not None else spec.r_max
    if hi is None:
        raise ValueError("l2_norm_radial needs r_max (argument or spec.r_max)")
    if spec.r_max is not None:
        hi = min(hi, spec.r_max)
    lo = spec.r_min
    if hi <= lo:
        return 0.0

    def integrand(r):
        vals = np.abs(np.asarray(m(r))) ** 2 * r ** (n - 1)
        return vals.reshape(len(r), 1)

    total = integrate_radial(integrand, lo, hi, width=_width(spec, hi, omega), spec=spec, breaks=breaks)
    return math.sqrt(max(sphere_total(n) * float(total[0]), 0.0))


def _angular(n: int, spec: QuadratureSpec):
    return angular_rule(n, spec.sphere_degree, spec.circle_nodes)


def _grid_integrand(n, spec, sq_fields):
    """Wrap ``sq_fields(r, omegas) -> (len(r), n_ang, k)`` into a radial integrand."""
    omegas, weights = _angular(n, spec)
    step = max(1, _CHUNK_POINTS // len(weights))

    def integrand(r):
        out = []
        for i in range(0, len(r), step):
            rc = r[i : i + step]
            vals = sq_fields(rc, omegas)
            out.append(np.einsum("ijk,j->ik", vals, weights) * (rc ** (n - 1))[:, None])
        return np.concatenate(out, axis=0)

    return integrand


def l2_norm_field(f, n: int, spec: QuadratureSpec | None = None, window: FrequencyWindow | None = None,
                  *, omega: float = 0.0, r_max: float | None = None) -> float:
    """(int_window |f(xi)|^2 dxi)^{1/2} for ``f(xi) -> scalar or (..., n) vector``.

    Product quadrature: radial Gauss-Legendre panels times the sphere rule.
    """
    if n > 3:
        raise ValueError("full field quadrature supports n <= 3; use radial forms for n > 3")
    spec = _resolve(spec, window)
    hi = r_max if r_max is not None else spec.r_max
    if hi is None:
        raise ValueError("l2_norm_field needs r_max (argument or spec.r_max)")
    lo, top = _interval(spec, window, hi)
    if top <= lo:
        return 0.0

    def sq(r, omegas):
        xi = r[:, None, None] * omegas[None, :, :]
        vals = np.asarray(f(xi))
        if vals.ndim == 3:
            vals = np.sum(np.abs(vals) ** 2, axis=-1)
        else:
            vals = np.abs(vals) ** 2
        return vals[..., None]

    breaks = window.breaks() if window is not None else ()
    total = integrate_radial(_grid_integrand(n, spec, sq), lo, top, width=_width(spec, hi, omega),
                             spec=spec, breaks=breaks)
    return math.sqrt(max(float(total[0]), 0.0))


def auto_r_max(p: FluidParams, d, t: float, profiles: bool = False) -> float:
    """Radius beyond which the selected fields are below e^{-37} of their scale.

    Once gamma^2 t / (alpha+beta) >= 37 the slow overdamped mode has decayed
    too, so the diffusive cutoff of the slowest Gaussian factor applies;
    before that the data's own frequency radius is used.
    """
    if d.is_zero():
        return 0.0
    r_data = d.freq_radius()
    if t <= 0:
        return r_data
    cut = diffusive_cutoff(min(p.alpha, 0.5 * p.nu), t)
    r = min(r_data, cut) if p.gamma**2 * t / p.nu >= TAIL_EXPONENT else r_data
    return max(r, cut) if profiles else r


def _field_bundle(p: FluidParams, d, t: float, names):
    """Return ``sq(r, omegas)`` giving |field|^2 for each name, shape (Nr, Nw, k).

    All fields share one evaluation of the data and of the solution factors.
    """
    n = d.n
    th = d.thresholds
    need_profile1 = any("profile" in nm and "profile2" not in nm for nm in names)
    need_profile2 = any("profile2" in nm for nm in names)

    def sq(r, omegas):
        xi = r[:, None, None] * omegas[None, :, :]
        d_rho = d.d_rho(xi)
        d_v = d.d_v(xi)
        rr = r[:, None]
        w = omegas[None, :, :]
        od = _dot(w, d_v)
        out = {}
        if t > 0:
            f = solution_factors(p, rr, t)
        else:
            f = None

        def rho_raw():
            if f is None:
                return d_rho / rr
            return f.a * d_rho / rr + f.B * od

        def v_raw():
            if f is None:
                return d_v / rr[..., None]
            return (f.h_alpha / rr)[..., None] * d_v + v_heat()

        def rho_heat():
            if f is None:
                return np.zeros_like(d_rho)
            return f.A0 * d_rho + f.B * od

        def v_heat():
            if f is None:
                return np.zeros_like(d_v)
            return (f.B * d_rho + f.A2 * od)[..., None] * w

        if need_profile1:
            if t > 0:
                j0, j1, j2 = j_family(p, rr, t)
            else:
                j0 = j1 = j2 = np.zeros_like(rr) + 0j
            wp = w @ th.p_v
            p1_rho = j0 * th.p_rho + j1 * wp
            p1_v = (j1 * th.p_rho + j2 * wp)[..., None] * w
        if need_profile2:
            if t > 0:
                _, j1, j2 = j_family(p, rr, t)
                damp = np.exp(-0.5 * p.nu * rr * rr * t)
                heat = np.exp(-p.alpha * rr * rr * t)
                cosw = np.cos(p.gamma * rr * t)
            else:
                j1 = j2 = np.zeros_like(rr) + 0j
                damp = heat = cosw = np.ones_like(rr)
            wq = w @ th.q_rho
            oq = w @ th.q_v.T
            vq = _dot(w, oq)
            p2_rho = -1j * (cosw * damp * wq + j1 * rr * vq)
            p2_v = -1j * ((j1 * rr * wq)[..., None] * w + heat[..., None] * oq + (j2 * rr * vq)[..., None] * w)

        cache = {}

        def get(name):
            if name in cache:
                return cache[name]
            val = {
                "rho": rho_raw,
                "v": v_raw,
                "rho_minus_heat": rho_heat,
                "v_minus_heat": v_heat,
                "rho_minus_heat_minus_profile": lambda: get("rho_minus_heat") - p1_rho,
                "v_minus_heat_minus_profile": lambda: get("v_minus_heat") - p1_v,
                "rho_minus_profile2": lambda: get("rho") - p2_rho,
                "v_minus_profile2": lambda: get("v") - p2_v,
                "profile1_rho": lambda: p1_rho + 0 * d_rho,
                "profile1_v": lambda: p1_v + 0 * d_v,
                "profile2_rho": lambda: p2_rho + 0 * d_rho,
                "profile2_v": lambda: p2_v + 0 * d_v,
                "_ref": lambda: np.concatenate([d_rho[..., None], d_v], axis=-1),
            }[name]()
            cache[name] = val
            return val

        for nm in names:
            val = get(nm)
            a2 = val.real**2 + val.imag**2
            out[nm] = np.einsum("...i->...", a2) if val.ndim == 3 else a2
        return np.stack([out[nm] for nm in names], axis=-1)

    return sq


def _check_integrable(d, which_set, spec: QuadratureSpec):
    if spec.r_min > 0 or d.mode != "dot_H11" or d.n > 2 or d.thresholds.b0_is_zero:
        return
    bad = sorted(set(which_set) & _SINGULAR)
    if bad:
        raise DivergentAtOrigin(
            f"divergent-at-origin: {', '.join(bad)} is not square integrable for b0 > 0 "
            f"in n = {d.n}; use a heat-subtracted quantity or set r_min > 0"
        )


def solution_norms(p: FluidParams, d, t: float, which, spec: QuadratureSpec | None = None,
                   window: FrequencyWindow | None = None) -> dict:
    """L^2 norms of several solution quantities at one time, sharing the quadrature."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if d.n > 3:
        raise ValueError("solution norms are computed by full quadrature for n <= 3")
    if p.n != d.n:
        p = p.with_dim(d.n)
    spec = _resolve(spec, window)
    which = list(which)
    comps = []
    for w in which:
        for c in _components(w):
            if c not in comps:
                comps.append(c)
    _check_integrable(d, which, spec)
    window = window if window is not None else FrequencyWindow.default(p)

    profiles = any("profile" in c for c in comps)
    r_max = auto_r_max(p, d, t, profiles)
    lo, hi = _interval(spec, window, r_max)
    if hi <= lo:
        return {w: 0.0 for w in which}

    names = comps + ["_ref"]
    omega = p.gamma * t + 2.0 * d.max_shift()
    extent = r_max if spec.r_max is None else min(r_max, spec.r_max)
    breaks = tuple(window.breaks()) + (p.r_star,)
    if lo > 0:
        # fields may behave like 1/|xi| just above an explicit r_min: grade geometrically
        breaks += tuple(lo * 2.0 ** np.arange(1, max(1, int(math.log2(hi / lo)))))
    totals = integrate_radial(
        _grid_integrand(d.n, spec, _field_bundle(p, d, t, names)),
        lo, hi, width=_width(spec, extent, omega), spec=spec, breaks=breaks,
        atol_ref=len(names) - 1,
    )
    sq = dict(zip(names, np.maximum(totals, 0.0)))
    return {w: math.sqrt(sum(sq[c] for c in _components(w))) for w in which}


def solution_norm(p: FluidParams, d, t: float, which: str, spec: QuadratureSpec | None = None,
                  window: FrequencyWindow | None = None) -> float:
    """L^2 norm of one solution quantity; see ``QUANTITIES``."""
    return solution_norms(p, d, t, [which], spec, window)[which]


@dataclass(frozen=True)
class Snapshot:
    n: int
    h: float
    R: float
    t: float
    x: np.ndarray
    rho: np.ndarray
    v: np.ndarray


def synthesize_grid_field(p: FluidParams, d, t: float, n: int, h: float, R: float) -> Snapshot:
    """Physical-space samples of (rho, v) from the frequency lattice h Z^n cut at |xi| <= R.

    An approximation: errors are aliasing from the cut (about e^{-c R^2 t})
    plus periodization on the box of half-width pi / h.
    """
    if n not in (1, 2) or d.n != n:
        raise ValueError("snapshots are produced for n in {1, 2} matching the datum")
    if not (h > 0 and R > h):
        raise ValueError("need 0 < h < R")
    if p.n != n:
        p = p.with_dim(n)
    th = d.thresholds
    if d.mode == "dot_H11" and not th.b0_is_zero:
        raise DivergentAtOrigin("divergent-at-origin: rho0_hat ~ P/|xi| cannot be sampled at xi = 0")
    from .solver import rho_hat, v_hat

    m = 2 * int(math.ceil(R / h))
    k = np.fft.fftfreq(m, d=1.0 / (m * h))  # h * (0, 1, ..., -1)
    grids = np.meshgrid(*([k] * n), indexing="ij")
    xi = np.stack(grids, axis=-1).reshape(-1, n)
    r = np.linalg.norm(xi, axis=-1)
    keep = (r <= R) & (r > 0)

    rho_s = np.zeros(len(xi), dtype=complex)
    v_s = np.zeros((len(xi), n), dtype=complex)
    if keep.any() and not d.is_zero():
        rho_s[keep] = rho_hat(p, d, t, xi[keep])
        v_s[keep] = v_hat(p, d, t, xi[keep])
    origin = r == 0
    if d.mode == "direct":
        # at xi = 0 the system reduces to rho_t = 0, v_t = 0
        rho_s[origin] = d.g_rho.ft(np.zeros((1, n)))[0]
        v_s[origin] = np.array([g.ft(np.zeros((1, n)))[0] for g in d.g_v])
    elif not d.is_zero():
        # |xi| rho0_hat -> 0 but rho0_hat -> -i omega.Q / |xi|... direction-dependent
        warnings.warn("xi = 0 lattice node excluded (no continuous extension)", RuntimeWarning)

    scale = (h / (2.0 * math.pi)) ** n * m**n
    shape = (m,) * n
    rho_x = np.fft.fftshift(np.fft.ifftn(rho_s.reshape(shape)) * scale).real
    v_x = np.stack(
        [np.fft.fftshift(np.fft.ifftn(v_s[:, j].reshape(shape)) * scale).real for j in range(n)],
        axis=-1,
    )
    dx = 2.0 * math.pi / (m * h)
    x = (np.arange(m) - m // 2) * dx
    return Snapshot(n, h, R, t, x, rho_x, v_x)


def format_snapshot(s: Snapshot) -> str:
    """Plain-text grid: one header line (n, h, R, t and the column names), then one row per point."""
    cols = "x,rho,v1" if s.n == 1 else "x1,x2,rho,v1,v2"
    buf = io.StringIO()
    buf.write(f"# n={s.n} h={s.h:.17e} R={s.R:.17e} t={s.t:.17e} columns={cols}\n")
    if s.n == 1:
        for xi, a, b in zip(s.x, s.rho, s.v[:, 0]):
            buf.write(f"{xi:.17e},{a:.17e},{b:.17e}\n")
    else:
        for i, x1 in enumerate(s.x):
            for j, x2 in enumerate(s.x):
                buf.write(f"{x1:.17e},{x2:.17e},{s.rho[i, j]:.17e},{s.v[i, j, 0]:.17e},{s.v[i, j, 1]:.17e}\n")
    return buf.getvalue()


def format_norm_table(times, values, envelope) -> str:
    """CSV with columns t, value, envelope, ratio in 17-digit scientific notation."""
    buf = io.StringIO()
    buf.write("t,value,envelope,ratio\n")
    for t, v in zip(times, values):
        e = float(envelope(t))
        buf.write(f"{t:.17e},{v:.17e},{e:.17e},{v / e:.17e}\n")
    return buf.getvalue()
