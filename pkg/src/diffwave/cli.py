"""Command-line front end: ``diffwave <command> [key=value ...]``.

Exit codes: 0 when every gate of the experiment passes, 2 on a gate
failure, 1 on an execution error (bad input, I/O, quadrature failure).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .config import COMMANDS, ConfigError, emit_config, parse_config
from .core import QuadratureError
from .lab import run_prop31, run_theorem1, run_theorem2, run_threshold_sweep
from .norms import format_snapshot, solution_norm, synthesize_grid_field
from .selftest import run_selftest
from .solver import char_roots

EXIT_OK, EXIT_ERROR, EXIT_GATE = 0, 1, 2


def _csv(header, rows) -> str:
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(f"{v:.17e}" if isinstance(v, (float, np.floating)) else str(v) for v in row))
    return "\n".join(out) + "\n"


def _roots(cfg):
    p = cfg.params
    rows = []
    for r in cfg.radii:
        c = char_roots(p, np.array([r])).item()
        lp, lm = complex(c.lambda_plus), complex(c.lambda_minus)
        rows.append((float(r), str(c.regime), lp.real, lp.imag, lm.real, lm.imag))
    text = "\n".join(
        f"r={r:g} regime={reg} lambda+={a:.10g}{b:+.10g}i lambda-={c:.10g}{d:+.10g}i" for r, reg, a, b, c, d in rows
    )
    csv = _csv(("r", "regime", "re_lambda_plus", "im_lambda_plus", "re_lambda_minus", "im_lambda_minus"), rows)
    return True, text, {"roots": csv}


def _thresholds(cfg):
    th = cfg.datum().thresholds
    rows = [("p_rho", float(th.p_rho))]
    rows += [(f"p_v{k + 1}", float(v)) for k, v in enumerate(th.p_v)]
    rows += [(f"q_rho{k + 1}", float(v)) for k, v in enumerate(th.q_rho)]
    rows += [(f"q_v{k + 1}{j + 1}", float(th.q_v[k, j])) for k in range(th.n) for j in range(th.n)]
    rows += [("b0", th.b0), ("b1", th.b1), ("b0_is_zero", str(th.b0_is_zero))]
    text = "\n".join(f"{k} = {v}" for k, v in rows)
    return True, text, {"thresholds": _csv(("key", "value"), rows)}


def _norm(cfg):
    val = solution_norm(cfg.params, cfg.datum(), cfg.t, cfg.which, cfg.quadrature, cfg.frequency_window())
    text = f"||{cfg.which}||(t={cfg.t:g}, window={cfg.window}) = {val:.17e}"
    return True, text, {"norm": _csv(("t", "value"), [(float(cfg.t), val)])}


def _prop31(cfg):
    eps0 = cfg.eps0 if cfg.eps0 is not None else 1.0
    sine, cosd = run_prop31(cfg.n, cfg.c0, cfg.c1, cfg.c2, cfg.grid, eps0, cfg.quadrature)
    text = sine.summary() + "\n" + cosd.summary()
    return sine.passed and cosd.passed, text, {"prop31_sine": sine.to_csv(), "prop31_cosdiff": cosd.to_csv()}


def _theorem(cfg, runner, tag):
    res = runner(cfg.params, cfg.datum(), cfg.grid, cfg.quadrature,
                 cfg.frequency_window() if (cfg.eps0 is not None or cfg.n0 is not None or cfg.window != "all") else None)
    files = {f"{tag}_main": res.main.to_csv(), f"{tag}_refined": res.refined.to_csv()}
    return res.passed, res.summary(), files


def _sweep(cfg):
    res = run_threshold_sweep(cfg.params, cfg.thetas, cfg.grid, cfg.n, spec=cfg.quadrature)
    files = {}
    for e in res.entries:
        files[f"sweep_theta_{e.theta:g}"] = e.report.to_csv()
    rows = [(e.theta, e.b0, e.report.fitted_exponent, e.crossing_time) for e in res.entries]
    files["sweep_summary"] = _csv(("theta", "b0", "tail_slope", "crossing_time"), rows)
    return res.passed, res.summary(), files


def _snapshot(cfg):
    s = synthesize_grid_field(cfg.params, cfg.datum(), cfg.t, cfg.n, cfg.h, cfg.R)
    text = f"snapshot n={s.n} h={s.h:g} R={s.R:g} t={s.t:g}: {len(s.x)} points per axis (approximate)"
    return True, text, {"snapshot": format_snapshot(s)}


def _selftest(cfg):
    results = run_selftest()
    text = "\n".join(f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in results)
    rows = [(name, "pass" if ok else "fail") for name, ok, _ in results]
    return all(ok for _, ok, _ in results), text, {"selftest": _csv(("check", "result"), rows)}


_DISPATCH = {
    "roots": _roots,
    "thresholds": _thresholds,
    "norm": _norm,
    "prop31": _prop31,
    "thm1": lambda c: _theorem(c, run_theorem1, "thm1"),
    "thm2": lambda c: _theorem(c, run_theorem2, "thm2"),
    "sweep": _sweep,
    "snapshot": _snapshot,
    "selftest": _selftest,
}


def run(cfg, quiet: bool = False, stdout=None, stderr=None) -> int:
    """Execute one experiment; write CSV files under ``cfg.out`` if set."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        passed, text, files = _DISPATCH[cfg.command](cfg)
    except (ValueError, QuadratureError, ArithmeticError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_ERROR
    verdict = "PASS" if passed else "FAIL"
    summary = f"{text}\nresult: {verdict}\n"
    if cfg.out:
        try:
            prefix = Path(cfg.out)
            if prefix.parent != Path("."):
                prefix.parent.mkdir(parents=True, exist_ok=True)
            for name, body in files.items():
                Path(f"{prefix}_{name}.csv").write_text(body)
            Path(f"{prefix}_summary.txt").write_text(summary)
            Path(f"{prefix}_config.txt").write_text(emit_config(cfg))
        except OSError as exc:
            print(f"I/O error: {exc}", file=stderr)
            return EXIT_ERROR
    if not quiet:
        stdout.write(summary)
    return EXIT_OK if passed else EXIT_GATE


class _Parser(argparse.ArgumentParser):
    # exit code 2 is reserved for gate failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(
        prog="diffwave",
        description="Spectral experiments for the linearized compressible Navier-Stokes system.",
    )
    ap.add_argument("command", nargs="?", metavar="command",
                    help=f"experiment to run, one of {', '.join(COMMANDS)} (overrides the config)")
    ap.add_argument("settings", nargs="*", metavar="key=value", help="configuration settings")
    ap.add_argument("--config", help="configuration file")
    ap.add_argument("--out", help="output path prefix for CSV and summary files")
    ap.add_argument("--override", action="append", default=[], metavar="key=value",
                    help="override a configuration key (repeatable)")
    ap.add_argument("--quiet", action="store_true", help="suppress the summary on stdout")
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.command and "=" in args.command:
        # no command given: the first token is already a setting
        args.settings.insert(0, args.command)
        args.command = None
    if args.command and args.command not in COMMANDS:
        ap.error(f"unknown command {args.command!r} (choose from {', '.join(COMMANDS)})")
    text = ""
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            print(f"I/O error: {exc}", file=sys.stderr)
            return EXIT_ERROR
    overrides = list(args.settings) + list(args.override)
    if args.command:
        overrides.insert(0, f"command={args.command}")
    if args.out:
        overrides.append(f"out={args.out}")
    try:
        cfg = parse_config(text, overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    return run(cfg, quiet=args.quiet)


if __name__ == "__main__":
    sys.exit(main())
