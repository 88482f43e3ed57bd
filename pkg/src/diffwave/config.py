"""Experiment configuration: a flat ``key = value`` text format.

Grammar::

    # comment
    command = thm2          # several key=value tokens may share one line
    n = 1  alpha = 1.0
    [generator.0]           # g_rho; [generator.k] is the k-th velocity component
    kind = monomial_gaussian
    axis = 1
    [generator.0.1]         # a further term added to g_rho
    kind = gaussian
    amplitude = 0.1
    shift = 0.5             # comma-separated vector of length n

Generator keys may also be given at top level as ``generator.I.key`` or
``generator.I.M.key`` (this is how ``--override`` reaches them).  Optional
numeric settings accept ``auto``.
"""

from __future__ import annotations

import dataclasses
import math
import re
from dataclasses import dataclass, field

from .catalog import build_datum, combine, make_gaussian, make_monomial_gaussian, shift, zero
from .core import FluidParams
from .norms import QUANTITIES
from .quadrature import QuadratureSpec
from .solver import FrequencyWindow

COMMANDS = ("roots", "thresholds", "norm", "prop31", "thm1", "thm2", "sweep", "snapshot", "selftest")
GENERATOR_KINDS = ("gaussian", "monomial_gaussian", "zero")
WINDOWS = ("interior", "bounded", "exterior", "all")


class ConfigError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str = "gaussian"
    width: float = 1.0
    amplitude: float = 1.0
    axis: int = 1
    shift: tuple = ()

    def build(self, n: int):
        if self.kind == "zero":
            g = zero(n)
        elif self.kind == "gaussian":
            g = make_gaussian(n, self.width, self.amplitude)
        else:
            g = make_monomial_gaussian(n, self.axis, self.width, self.amplitude)
        if self.shift:
            g = shift(g, self.shift)
        return g


@dataclass
class ExperimentConfig:
    command: str = "selftest"
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    n: int = 1
    mode: str = "dot_H11"
    # time grid
    t0: float = 1e2
    t1: float = 1e6
    count: int = 25
    # multiplier constants (prop31)
    c0: float = 1.0
    c1: float = 1.0
    c2: float = 1.0
    # windows; None means the documented default
    eps0: float | None = None
    n0: float | None = None
    window: str = "all"
    # single-shot commands
    t: float = 100.0
    which: str = "pair_minus_heat"
    radii: tuple = (0.1, 1.0, 100.0)
    h: float = 0.1
    R: float = 10.0
    thetas: tuple = (1.0, 0.1, 0.0)
    # quadrature overrides
    r_min: float = 0.0
    r_max: float | None = None
    panels_per_halfperiod: int = 4
    rel_tol: float = 1e-7
    circle_nodes: int = 64
    sphere_degree: int = 20
    out: str | None = None
    generators: dict = field(default_factory=dict)

    @property
    def params(self) -> FluidParams:
        return FluidParams(self.alpha, self.beta, self.gamma, self.n)

    @property
    def quadrature(self) -> QuadratureSpec:
        return QuadratureSpec(
            r_min=self.r_min,
            r_max=self.r_max,
            panels_per_halfperiod=self.panels_per_halfperiod,
            rel_tol=self.rel_tol,
            circle_nodes=self.circle_nodes,
            sphere_degree=self.sphere_degree,
        )

    @property
    def grid(self) -> tuple:
        return (self.t0, self.t1, self.count)

    def frequency_window(self) -> FrequencyWindow:
        base = FrequencyWindow.default(self.params, self.window)
        return FrequencyWindow(
            self.eps0 if self.eps0 is not None else base.eps0,
            self.n0 if self.n0 is not None else base.n0,
            self.window,
        )

    def datum(self):
        n = self.n
        comps = []
        for i in range(n + 1):
            terms = self.generators.get(i)
            if not terms:
                comps.append(zero(n))
            elif len(terms) == 1:
                comps.append(terms[0].build(n))
            else:
                comps.append(combine([1.0] * len(terms), [s.build(n) for s in terms]))
        return build_datum(self.mode, comps[0], comps[1:])


_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig) if f.name != "generators"}
_OPTIONAL = {"eps0", "n0", "r_max", "out"}
_INT = {"n", "count", "panels_per_halfperiod", "circle_nodes", "sphere_degree"}
_TUPLE = {"radii", "thetas"}
_STR = {"command", "mode", "window", "which", "out"}
_GEN_FIELDS = {f.name for f in dataclasses.fields(GeneratorSpec)}

_SECTION = re.compile(r"^\[generator\.(\d+)(?:\.(\d+))?\]$")
_TOKEN = re.compile(r"([A-Za-z_][\w.]*)\s*=\s*(\S+)")


def _to_float(text, line, key):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}", line) from None


def _to_int(text, line, key):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}", line) from None
    if v != int(v):
        raise ConfigError(f"{key}: expected an integer, got {text!r}", line)
    return int(v)


def _convert(key, text, line):
    if key in _OPTIONAL and text.lower() in ("auto", "none"):
        return None
    if key in _STR:
        return text
    if key in _INT:
        return _to_int(text, line, key)
    if key in _TUPLE:
        return tuple(_to_float(s, line, key) for s in text.split(",") if s)
    return _to_float(text, line, key)


def _gen_value(key, text, line):
    if key == "kind":
        if text not in GENERATOR_KINDS:
            raise ConfigError(f"kind must be one of {GENERATOR_KINDS}, got {text!r}", line)
        return text
    if key == "axis":
        return _to_int(text, line, key)
    if key == "shift":
        return tuple(_to_float(s, line, key) for s in text.split(",") if s)
    return _to_float(text, line, key)


def _tokens(raw: str, line: int):
    body = raw.split("#", 1)[0].strip()
    if not body:
        return []
    # "key = value" with spaces, or several "k=v" tokens
    compact = re.sub(r",\s+", ",", re.sub(r"\s*=\s*", "=", body))
    out = []
    for part in compact.split():
        m = _TOKEN.fullmatch(part)
        if not m:
            raise ConfigError(f"cannot parse {part!r} (expected key = value)", line)
        out.append((m.group(1), m.group(2)))
    return out


def parse_config(text: str, overrides=()) -> ExperimentConfig:
    """Parse configuration text; ``overrides`` are extra ``key=value`` strings applied last."""
    values = {}
    where = {}
    gens = {}
    gen_where = {}
    section = None

    def set_gen(idx, term, key, val, line):
        if key not in _GEN_FIELDS:
            raise ConfigError(f"unknown generator key {key!r}", line)
        gens.setdefault(idx, {}).setdefault(term, {})[key] = _gen_value(key, val, line)
        gen_where[(idx, term)] = line

    def set_top(key, val, line):
        if key.startswith("generator."):
            parts = key.split(".")
            if len(parts) not in (3, 4) or not all(p.isdigit() for p in parts[1:-1]):
                raise ConfigError(f"bad generator key {key!r}", line)
            idx = int(parts[1])
            term = int(parts[2]) if len(parts) == 4 else 0
            set_gen(idx, term, parts[-1], val, line)
            return
        if key not in _FIELDS:
            raise ConfigError(f"unknown key {key!r}", line)
        values[key] = _convert(key, val, line)
        where[key] = line

    lines = text.splitlines()
    for lineno, raw in enumerate(lines, start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped.startswith("["):
            m = _SECTION.match(stripped)
            if not m:
                raise ConfigError(f"unknown section {stripped!r}", lineno)
            section = (int(m.group(1)), int(m.group(2) or 0))
            gens.setdefault(section[0], {}).setdefault(section[1], {})
            gen_where[section] = lineno
            continue
        for key, val in _tokens(raw, lineno):
            if section is None:
                set_top(key, val, lineno)
            else:
                set_gen(section[0], section[1], key, val, lineno)

    for k, item in enumerate(overrides):
        line = f"override {k + 1}"
        if "=" not in item:
            raise ConfigError(f"override {item!r} is not key=value", line)
        key, val = item.split("=", 1)
        set_top(key.strip(), val.strip(), line)

    cfg = ExperimentConfig(**values)
    _validate(cfg, where)

    if not gens:
        default = GeneratorSpec("monomial_gaussian") if cfg.command == "thm2" else GeneratorSpec("gaussian")
        gens = {0: {0: dataclasses.asdict(default)}}
    built = {}
    for idx in sorted(gens):
        line = gen_where.get((idx, 0))
        if idx > cfg.n:
            raise ConfigError(f"generator index {idx} exceeds n = {cfg.n}", line)
        terms = gens[idx]
        if sorted(terms) != list(range(len(terms))):
            raise ConfigError(f"generator.{idx} terms must be numbered 0, 1, ...", line)
        specs = []
        for term in sorted(terms):
            tl = gen_where.get((idx, term))
            try:
                spec = GeneratorSpec(**terms[term])
                if spec.kind != "zero":
                    spec.build(cfg.n)
            except (ValueError, IndexError) as exc:
                raise ConfigError(f"generator.{idx}.{term}: {exc}", tl) from None
            specs.append(spec)
        built[idx] = tuple(specs)
    cfg.generators = built
    return cfg


def _validate(cfg: ExperimentConfig, where):
    def fail(key, msg):
        raise ConfigError(f"{key}: {msg}", where.get(key))

    if cfg.command not in COMMANDS:
        fail("command", f"must be one of {COMMANDS}")
    for key in ("alpha", "gamma"):
        if not getattr(cfg, key) > 0:
            fail(key, "must be > 0")
    if not cfg.beta >= 0:
        fail("beta", "must be >= 0")
    if cfg.n < 1:
        fail("n", "must be >= 1")
    if cfg.mode not in ("dot_H11", "direct"):
        fail("mode", "must be dot_H11 or direct")
    if not 1 < cfg.t0 < cfg.t1:
        fail("t0" if "t0" in where else "t1", "need 1 < t0 < t1")
    if cfg.count < 2:
        fail("count", "must be >= 2")
    for key in ("c0", "c1", "c2", "h", "R"):
        if not getattr(cfg, key) > 0:
            fail(key, "must be > 0")
    if cfg.t < 0:
        fail("t", "must be >= 0")
    if cfg.window not in WINDOWS:
        fail("window", f"must be one of {WINDOWS}")
    if cfg.which not in QUANTITIES:
        fail("which", f"must be one of {QUANTITIES}")
    if any(not r > 0 for r in cfg.radii) or not cfg.radii:
        fail("radii", "radii must be > 0")
    if not cfg.thetas:
        fail("thetas", "need at least one value")
    if cfg.eps0 is not None and not cfg.eps0 > 0:
        fail("eps0", "must be > 0")
    eps0 = cfg.eps0 if cfg.eps0 is not None else FrequencyWindow.default(cfg.params).eps0
    if cfg.n0 is not None and not cfg.n0 > eps0:
        fail("n0", "must exceed eps0")
    if cfg.r_max is not None and not cfg.r_max > cfg.r_min:
        fail("r_max", "must exceed r_min")
    if cfg.r_min < 0:
        fail("r_min", "must be >= 0")
    if cfg.panels_per_halfperiod < 4:
        fail("panels_per_halfperiod", "must be >= 4")
    if cfg.circle_nodes < 64:
        fail("circle_nodes", "must be >= 64")
    if cfg.sphere_degree < 20:
        fail("sphere_degree", "must be >= 20")
    if not cfg.rel_tol > 0:
        fail("rel_tol", "must be > 0")


def _fmt(value) -> str:
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value) if math.isfinite(value) else str(value)
    if isinstance(value, tuple):
        return ",".join(_fmt(float(v)) for v in value)
    return str(value)


def emit_config(cfg: ExperimentConfig) -> str:
    """Text that parses back to an equal configuration."""
    lines = []
    for name in _FIELDS:
        lines.append(f"{name} = {_fmt(getattr(cfg, name))}")
    for idx in sorted(cfg.generators):
        for term, spec in enumerate(cfg.generators[idx]):
            lines.append(f"[generator.{idx}]" if term == 0 else f"[generator.{idx}.{term}]")
            lines.append(f"kind = {spec.kind}")
            lines.append(f"width = {_fmt(float(spec.width))}")
            lines.append(f"amplitude = {_fmt(float(spec.amplitude))}")
            lines.append(f"axis = {int(spec.axis)}")
            if spec.shift:
                lines.append(f"shift = {_fmt(tuple(spec.shift))}")
    return "\n".join(lines) + "\n"
