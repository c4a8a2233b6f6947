"""Command-line front end.

    semireg COMMAND --config system.cfg [options]

The config file is flat ``key=value`` text, one assignment per line, with
``#`` comments.  Exit codes: 0 success, 1 configuration error, 2 numerical
failure.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .dense_oracle import oracle_report
from .errors import ConfigError, FitError, SingularResolventError
from .evolution import ModalState, evolve, spectral_portrait
from .optimality_witness import optimality_trend
from .report import svg_loglog, write_csv, write_kv
from .resolvent_probe import ScanPolicy, classify, sweep
from .spectral_model import (
    PowerSymbol,
    SpectralSymbols,
    SpectrumKind,
    SystemConfig,
    build_spectrum,
)

__all__ = ["RunConfig", "parse_config", "parse_config_text", "run", "main", "COMMANDS"]

COMMANDS = ("hypotheses", "sweep", "classify", "witness", "evolve", "portrait", "oracle")

SYSTEM_KEYS = (
    "alpha", "beta", "gamma", "mu", "theta",
    "spectrum.kind", "spectrum.length", "spectrum.lx", "spectrum.ly",
    "spectrum.modes", "spectrum.file",
    "symbol.a1", "symbol.a2", "symbol.b1", "symbol.b2",
    "allow_noncoercive",
)
RUN_KEYS = ("lambda_min", "lambda_max", "points", "scan", "window", "tol", "r")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2


@dataclass(frozen=True)
class RunConfig:
    system: SystemConfig
    settings: dict = field(repr=False)
    lambda_min: float = 1e2
    lambda_max: float = 1e6
    points: int = 97
    scan: str = "adaptive"
    window: float = 0.5
    tol: float = 0.05
    r: float | None = None
    out: str | None = None
    format: str = "kv"
    plot: str | None = None

    @property
    def allow_noncoercive(self):
        return self.system.allow_noncoercive

    def echo(self):
        """Effective configuration as key=value text; parses back to an equal RunConfig."""
        lines = [f"{k}={v}" for k, v in self.settings.items()]
        for key in RUN_KEYS:
            value = getattr(self, key)
            if value is not None:
                lines.append(f"{key}={value!r}" if isinstance(value, float) else f"{key}={value}")
        return "\n".join(lines) + "\n"


def _float(raw, key):
    try:
        return float(raw[key])
    except ValueError:
        raise ConfigError(f"{key} must be a number, got {raw[key]!r}") from None


def _bool(text, key):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{key} must be true or false, got {text!r}")


def _split_lines(text):
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        if key not in SYSTEM_KEYS and key not in RUN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def _require(raw, *keys):
    for key in keys:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")


def parse_config_text(text, base_dir=".") -> RunConfig:
    raw = _split_lines(text)
    _require(raw, "alpha", "beta", "gamma", "mu", "theta", "spectrum.kind")
    alpha, beta, gamma = (_float(raw, k) for k in ("alpha", "beta", "gamma"))
    mu, theta = _float(raw, "mu"), _float(raw, "theta")
    if beta == 0:
        raise ConfigError("beta must be a nonzero real constant, got beta=0")
    for name, value in (("mu", mu), ("theta", theta)):
        if not 0 < value <= 1:
            raise ConfigError(f"{name} must lie in (0, 1], got {value}")

    try:
        kind = SpectrumKind(raw["spectrum.kind"])
    except ValueError:
        choices = ", ".join(k.value for k in SpectrumKind)
        raise ConfigError(f"spectrum.kind must be one of {choices}, got {raw['spectrum.kind']!r}") from None

    settings = {k: raw[k] for k in ("alpha", "beta", "gamma", "mu", "theta")}
    settings["spectrum.kind"] = kind.value
    n_modes = None
    if kind is not SpectrumKind.CUSTOM_FILE or "spectrum.modes" in raw:
        _require(raw, "spectrum.modes")
        try:
            n_modes = int(raw["spectrum.modes"])
        except ValueError:
            raise ConfigError(f"spectrum.modes must be an integer, got {raw['spectrum.modes']!r}") from None
    if kind in (SpectrumKind.DIRICHLET_1D, SpectrumKind.HINGED_PLATE_1D):
        _require(raw, "spectrum.length")
        params = {"length": _float(raw, "spectrum.length")}
        settings["spectrum.length"] = raw["spectrum.length"]
    elif kind is SpectrumKind.CUSTOM_FILE:
        _require(raw, "spectrum.file")
        path = Path(raw["spectrum.file"])
        if not path.is_absolute():
            path = (Path(base_dir) / path).resolve()
        params = {"path": str(path)}
        settings["spectrum.file"] = str(path)
    else:
        _require(raw, "spectrum.lx", "spectrum.ly")
        params = {"lx": _float(raw, "spectrum.lx"), "ly": _float(raw, "spectrum.ly")}
        settings["spectrum.lx"], settings["spectrum.ly"] = raw["spectrum.lx"], raw["spectrum.ly"]
    if n_modes is not None:
        settings["spectrum.modes"] = str(n_modes)
    spectrum = build_spectrum(kind, params, n_modes)

    a1 = PowerSymbol.parse(raw.get("symbol.a1", "1,1"))
    a2 = PowerSymbol.parse(raw.get("symbol.a2", "1,1"))
    b1 = PowerSymbol.parse(raw["symbol.b1"]) if "symbol.b1" in raw else PowerSymbol(1.0, mu * a1.exp)
    b2 = PowerSymbol.parse(raw["symbol.b2"]) if "symbol.b2" in raw else PowerSymbol(1.0, theta * a2.exp)
    for name, sym in (("a1", a1), ("a2", a2), ("b1", b1), ("b2", b2)):
        settings[f"symbol.{name}"] = str(sym)
    allow = _bool(raw.get("allow_noncoercive", "false"), "allow_noncoercive")
    settings["allow_noncoercive"] = "true" if allow else "false"

    system = SystemConfig(
        alpha, beta, gamma, mu, theta, spectrum,
        SpectralSymbols(a1, a2, b1, b2), allow_noncoercive=allow,
    )

    run = {}
    for key in ("lambda_min", "lambda_max", "window", "tol", "r"):
        if key in raw:
            run[key] = _float(raw, key)
    if "points" in raw:
        try:
            run["points"] = int(raw["points"])
        except ValueError:
            raise ConfigError(f"points must be an integer, got {raw['points']!r}") from None
    if "scan" in raw:
        run["scan"] = str(ScanPolicy.coerce(raw["scan"]))
    return RunConfig(system=system, settings=settings, **run)


def parse_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, base_dir=path.parent)


def _mode_range(text, n):
    if text is None:
        return None
    first, sep, last = text.partition(":")
    try:
        lo = int(first) if first else 1
        hi = int(last) if sep and last else (n if sep else lo)
    except ValueError:
        raise ConfigError(f"--modes must be FIRST:LAST, got {text!r}") from None
    if not 1 <= lo <= hi <= n:
        raise ConfigError(f"--modes must satisfy 1 <= first <= last <= {n}, got {text!r}")
    return lo, hi


def _cmd_hypotheses(rc):
    report = rc.system.hypotheses.as_dict()
    report["s"] = rc.system.s
    write_kv(report, rc.out, rc.format)


def _cmd_sweep(rc):
    result = sweep(rc.system, rc.lambda_min, rc.lambda_max, rc.points, rc.scan)
    write_csv(("lambda", "resolvent_norm", "argmax_omega", "sigma_min"), result.rows(), rc.out)


def _cmd_classify(rc):
    verdict = classify(
        rc.system, rc.lambda_min, rc.lambda_max, rc.points, rc.scan, rc.window, rc.tol
    )
    write_kv(verdict.as_dict(), rc.out, rc.format)
    if rc.plot:
        fit = verdict.evidence
        svg_loglog(
            verdict.sweep.lambdas,
            verdict.sweep.norms,
            rc.plot,
            fit=(fit.slope, fit.intercept, fit.window),
            title=f"{verdict.verdict.value}: mu={rc.system.mu:g}, theta={rc.system.theta:g}",
        )


def _cmd_witness(rc, args):
    n = len(rc.system.spectrum)
    rng = _mode_range(args.modes, n)
    if rng is None:
        idx = np.unique(np.rint(np.geomspace(1, n, min(n, 16))).astype(int))
    else:
        idx = np.arange(rng[0], rng[1] + 1)
    r = rc.r if rc.r is not None else min(1.0, 2 * rc.system.mu)
    report = optimality_trend(rc.system, r, mode_indices=idx)
    rows = (
        (e.omega, e.lam, abs(e.a), abs(e.c), e.residual_norm, e.scaled(r))
        for e in report.elements
    )
    write_csv(("omega", "lambda", "abs_a", "abs_c", "residual_norm", "scaled_value"), rows, rc.out)
    write_kv(report.as_dict(), style=rc.format, stream=sys.stderr)


def _cmd_evolve(rc, args):
    try:
        times = [float(t) for t in args.times.split(",")]
    except ValueError:
        raise ConfigError(f"--times must be comma-separated numbers, got {args.times!r}") from None
    n = len(rc.system.spectrum)
    initial = ModalState.random(n, np.random.default_rng(args.seed))
    traj = evolve(rc.system, initial, times)
    write_csv(
        ("t", "energy_norm", "generator_norm"),
        ((s.t, s.energy_norm, s.generator_norm) for s in traj),
        rc.out,
    )


def _cmd_portrait(rc, args):
    rows = spectral_portrait(rc.system, _mode_range(args.modes, len(rc.system.spectrum)))
    write_csv(("omega", "re", "im"), ((r.omega, r.re, r.im) for r in rows), rc.out)


def _cmd_oracle(rc, args):
    report = oracle_report(rc.system, n_modes=args.oracle_modes, times=(1.0, 10.0), seed=args.seed)
    write_kv(report.as_dict(), rc.out, rc.format)
    return EXIT_OK if report.passed else EXIT_NUMERIC


def run(command, rc: RunConfig, args=None) -> int:
    """Execute one command; returns the process exit code."""
    args = args or argparse.Namespace(modes=None, times="0,0.001,0.01,0.1,1,10", seed=0, oracle_modes=64)
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    try:
        if command == "hypotheses":
            _cmd_hypotheses(rc)
        elif command == "sweep":
            _cmd_sweep(rc)
        elif command == "classify":
            _cmd_classify(rc)
        elif command == "witness":
            _cmd_witness(rc, args)
        elif command == "evolve":
            _cmd_evolve(rc, args)
        elif command == "portrait":
            _cmd_portrait(rc, args)
        else:
            return _cmd_oracle(rc, args)
    except (SingularResolventError, FitError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH")
    common.add_argument("--lambda-min", type=float)
    common.add_argument("--lambda-max", type=float)
    common.add_argument("--points", type=int)
    common.add_argument("--scan", choices=("adaptive", "full"))
    common.add_argument("--window", type=float)
    common.add_argument("--tol", type=float)
    common.add_argument("--r", type=float, help="exponent for the witness scaling")
    common.add_argument("--out", metavar="PATH", help="output file (default stdout)")
    common.add_argument("--format", choices=("kv", "json"), default="kv")
    common.add_argument("--plot", nargs="?", const="", metavar="SVG",
                        help="classify: write an SVG of the sweep and fit")
    common.add_argument("--modes", metavar="FIRST:LAST", help="one-based mode range")
    common.add_argument("--times", default="0,0.001,0.01,0.1,1,10", help="evolve: comma-separated times")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--oracle-modes", type=int, default=64)
    common.add_argument("--quiet", action="store_true", help="do not echo the effective config")

    parser = argparse.ArgumentParser(prog="semireg", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        rc = parse_config(args.config)
        overrides = {
            k: getattr(args, k)
            for k in ("lambda_min", "lambda_max", "points", "scan", "window", "tol", "r", "out")
            if getattr(args, k) is not None
        }
        overrides["format"] = args.format
        if args.plot is not None:
            if args.plot:
                overrides["plot"] = args.plot
            elif args.out:
                overrides["plot"] = str(Path(args.out).with_suffix(".svg"))
            else:
                overrides["plot"] = "classify.svg"
        rc = replace(rc, **overrides)
        if not args.quiet:
            sys.stderr.write("".join(f"# {line}\n" for line in rc.echo().splitlines()))
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _show_warning
            return run(args.command, rc, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def _show_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
