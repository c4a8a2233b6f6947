"""Resolvent norms along the imaginary axis and decay-exponent classification.

The generator is block diagonal over the eigenmodes, so

    ||(i lam - A)^{-1}|| = sup_k 1 / sigma_min(i lam I - M_k).

Near-resonant modes (a1(omega) or a2(omega) close to lam**2) dominate the
supremum; the adaptive scan visits those plus a fixed sample of low and
geometrically spaced modes.
"""

from __future__ import annotations

import enum
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, FitError, SingularResolventError, TruncationWarning
from .spectral_model import ModeBlock, SystemConfig

__all__ = [
    "ScanPolicy",
    "ADAPTIVE",
    "FULL",
    "ResolventSample",
    "SweepResult",
    "ExponentFit",
    "Verdict",
    "RegularityVerdict",
    "block_resolvent_norm",
    "global_resolvent_norm",
    "scan_indices",
    "sweep",
    "fit_loglog",
    "fit_decay_exponent",
    "classify",
    "resonance_limit",
]

# sigma_min at or below this multiple of sigma_max is treated as singular
SINGULAR_FLOOR = 4 * np.finfo(np.float64).eps

DEFAULT_LAMBDA_MIN = 1e2
DEFAULT_LAMBDA_MAX = 1e6
DEFAULT_POINTS = 97
DEFAULT_WINDOW = 0.5
DEFAULT_TOL = 0.05
DEFAULT_R2_MIN = 0.98


@dataclass(frozen=True)
class ScanPolicy:
    mode: str = "adaptive"
    ratio: float = 100.0
    n_lowest: int = 32
    n_tail: int = 64

    def __post_init__(self):
        if self.mode not in ("adaptive", "full"):
            raise ConfigError(f"scan must be 'adaptive' or 'full', got {self.mode!r}")
        if not self.ratio > 1:
            raise ConfigError(f"scan ratio must exceed 1, got {self.ratio}")

    @classmethod
    def coerce(cls, scan):
        if isinstance(scan, cls):
            return scan
        return cls(mode=str(scan))

    def __str__(self):
        return self.mode


ADAPTIVE = ScanPolicy("adaptive")
FULL = ScanPolicy("full")


@dataclass(frozen=True)
class ResolventSample:
    lam: float
    norm: float
    argmax_omega: float
    sigma_min: float
    mode_index: int = -1


def _shifted(blocks, lam):
    shifted = -np.asarray(blocks, dtype=np.complex128)
    idx = np.arange(4)
    shifted[..., idx, idx] += 1j * lam
    return shifted


def _singular_values(blocks, lam):
    return np.linalg.svd(_shifted(blocks, lam), compute_uv=False)


def block_resolvent_norm(block: ModeBlock, lam: float) -> float:
    """1 / sigma_min(i lam I - M): the block resolvent norm in the energy inner product."""
    s = _singular_values(block.matrix, lam)
    if s[-1] <= SINGULAR_FLOOR * max(s[0], 1.0):
        raise SingularResolventError(lam, block.omega, s[-1])
    return float(1.0 / s[-1])


def _tail_indices(n, count):
    return np.unique(np.rint(np.geomspace(1, n, min(count, n))).astype(np.intp) - 1)


def scan_indices(config: SystemConfig, lam: float, scan=ADAPTIVE) -> np.ndarray:
    """Zero-based mode indices visited by ``scan`` at frequency ``lam``."""
    scan = ScanPolicy.coerce(scan)
    n = len(config.spectrum)
    if scan.mode == "full":
        return np.arange(n)
    lam2 = lam * lam
    a1, a2 = config.symbol_values[:2]
    parts = [np.arange(min(scan.n_lowest, n)), _tail_indices(n, scan.n_tail)]
    # symbols are nondecreasing in omega, so the resonance windows are contiguous
    for a in (a1, a2):
        lo = np.searchsorted(a, lam2 / scan.ratio, side="left")
        hi = np.searchsorted(a, lam2 * scan.ratio, side="right")
        parts.append(np.arange(lo, hi))
    return np.unique(np.concatenate(parts))


def global_resolvent_norm(config: SystemConfig, lam: float, scan=ADAPTIVE) -> ResolventSample:
    idx = scan_indices(config, lam, scan)
    if idx.size == 0:
        raise ConfigError(f"no modes scanned at lambda={lam}")
    s = _singular_values(config.blocks[idx], lam)
    smin, smax = s[:, -1], s[:, 0]
    singular = smin <= SINGULAR_FLOOR * np.maximum(smax, 1.0)
    if singular.any():
        j = int(np.argmax(singular))
        raise SingularResolventError(lam, float(config.omegas[idx[j]]), float(smin[j]))
    # argmin keeps the first (smallest omega) of tied modes
    j = int(np.argmin(smin))
    k = int(idx[j])
    return ResolventSample(
        lam=float(lam),
        norm=float(1.0 / smin[j]),
        argmax_omega=float(config.omegas[k]),
        sigma_min=float(smin[j]),
        mode_index=k,
    )


def _worker_count(n_tasks):
    env = os.environ.get("RESOLVENT_PROBE_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, int(env))
        except ValueError:
            raise ConfigError(f"RESOLVENT_PROBE_THREADS must be an integer, got {env!r}") from None
    return max(1, min(cap, n_tasks))


@dataclass(frozen=True)
class SweepResult:
    config_summary: dict
    grid: np.ndarray = field(repr=False)
    samples: tuple = field(repr=False)
    scan: ScanPolicy = ADAPTIVE

    @classmethod
    def from_arrays(cls, lambdas, norms, summary=None):
        """Wrap externally computed (lambda, norm) pairs, e.g. synthetic data."""
        lambdas = np.asarray(lambdas, dtype=np.float64)
        norms = np.asarray(norms, dtype=np.float64)
        samples = tuple(
            ResolventSample(float(l), float(v), math.nan, float(1 / v)) for l, v in zip(lambdas, norms)
        )
        return cls(summary or {}, lambdas, samples)

    @property
    def lambdas(self):
        return np.array([s.lam for s in self.samples])

    @property
    def norms(self):
        return np.array([s.norm for s in self.samples])

    def rows(self):
        for s in self.samples:
            yield (s.lam, s.norm, s.argmax_omega, s.sigma_min)


def _config_summary(config):
    sym = config.symbols
    return {
        "alpha": config.alpha,
        "beta": config.beta,
        "gamma": config.gamma,
        "mu": config.mu,
        "theta": config.theta,
        "spectrum": config.spectrum.kind.value,
        "modes": len(config.spectrum),
        "symbols": f"a1={sym.a1} a2={sym.a2} b1={sym.b1} b2={sym.b2}",
    }


def sweep(
    config: SystemConfig,
    lambda_min=DEFAULT_LAMBDA_MIN,
    lambda_max=DEFAULT_LAMBDA_MAX,
    n_points=DEFAULT_POINTS,
    scan=ADAPTIVE,
) -> SweepResult:
    """Resolvent norms on a log-spaced grid; results are in grid order."""
    if not (0 < lambda_min < lambda_max):
        raise ConfigError(f"need 0 < lambda_min < lambda_max, got {lambda_min}, {lambda_max}")
    if int(n_points) != n_points or n_points < 2:
        raise ConfigError(f"need at least 2 grid points, got {n_points}")
    scan = ScanPolicy.coerce(scan)
    grid = np.geomspace(lambda_min, lambda_max, int(n_points))
    grid[0], grid[-1] = lambda_min, lambda_max
    config.blocks  # build the shared block cache before threads start

    def one(lam):
        return global_resolvent_norm(config, lam, scan)

    workers = _worker_count(grid.size)
    if workers == 1:
        samples = tuple(one(lam) for lam in grid)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            samples = tuple(pool.map(one, grid))
    return SweepResult(_config_summary(config), grid, samples, scan)


@dataclass(frozen=True)
class ExponentFit:
    slope: float
    intercept: float
    r_squared: float
    window: tuple
    n_points: int


def fit_loglog(x, y):
    """Least-squares line through (log x, log y); returns (slope, intercept, r2)."""
    lx, ly = np.log(np.asarray(x, dtype=np.float64)), np.log(np.asarray(y, dtype=np.float64))
    if lx.size < 3:
        raise FitError(f"need at least 3 points for a fit, got {lx.size}")
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res == 0.0 else 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return float(slope), float(intercept), r2


def fit_decay_exponent(result: SweepResult, window_fraction=DEFAULT_WINDOW) -> ExponentFit:
    """Fit log ||R|| against log lambda over the top ``window_fraction`` of the log range."""
    if not 0 < window_fraction <= 1:
        raise ConfigError(f"window fraction must lie in (0, 1], got {window_fraction}")
    lam = np.abs(result.lambdas)
    norms = result.norms
    if lam.size < 3:
        raise FitError(f"need at least 3 samples, got {lam.size}")
    x = np.log(lam)
    cut = x.max() - window_fraction * (x.max() - x.min())
    # tolerate rounding in the cut for exact grid points
    sel = x >= cut - 1e-12 * max(1.0, abs(cut))
    if sel.sum() < 3:
        raise FitError(f"only {int(sel.sum())} samples inside the fit window")
    slope, intercept, r2 = fit_loglog(lam[sel], norms[sel])
    return ExponentFit(slope, intercept, r2, (float(lam[sel].min()), float(lam[sel].max())), int(sel.sum()))


class Verdict(str, enum.Enum):
    ANALYTIC = "Analytic"
    GEVREY = "Gevrey"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class RegularityVerdict:
    verdict: Verdict
    s: float
    delta: float | None
    fitted_slope: float
    tolerance: float
    evidence: ExponentFit
    distance_analytic: float
    distance_gevrey: float | None
    sup_scaled_norm: float
    sweep: SweepResult = field(repr=False, default=None)

    def as_dict(self):
        return {
            "verdict": self.verdict.value,
            "s": self.s,
            "delta": "none" if self.delta is None else self.delta,
            "fitted_slope": self.fitted_slope,
            "intercept": self.evidence.intercept,
            "r_squared": self.evidence.r_squared,
            "window_lo": self.evidence.window[0],
            "window_hi": self.evidence.window[1],
            "tolerance": self.tolerance,
        }


def resonance_limit(config: SystemConfig) -> float:
    """Largest undamped resonance frequency sqrt(a_j(omega_N)) of the listed spectrum."""
    a1, a2 = config.symbol_values[:2]
    return float(math.sqrt(max(a1[-1], a2[-1])))


def classify(
    config: SystemConfig,
    lambda_min=DEFAULT_LAMBDA_MIN,
    lambda_max=DEFAULT_LAMBDA_MAX,
    n_points=DEFAULT_POINTS,
    scan=ADAPTIVE,
    window_fraction=DEFAULT_WINDOW,
    tol=DEFAULT_TOL,
    r2_min=DEFAULT_R2_MIN,
) -> RegularityVerdict:
    """Analytic if the fitted slope is within ``tol`` of -1, Gevrey(1/(2s)) if
    s < 1/2 and the slope is within ``tol`` of -2s; the closer target wins when
    both match.  A poor fit (r^2 < ``r2_min``) is Inconclusive."""
    result = sweep(config, lambda_min, lambda_max, n_points, scan)
    fit = fit_decay_exponent(result, window_fraction)
    if fit.window[1] > resonance_limit(config):
        warnings.warn(
            f"fit window reaches lambda={fit.window[1]:.4g} beyond the largest listed "
            f"resonance {resonance_limit(config):.4g}; the finite section decays like 1/lambda there",
            TruncationWarning,
            stacklevel=2,
        )
    s = config.s
    d_an = abs(fit.slope + 1.0)
    d_gev = abs(fit.slope + 2.0 * s) if s < 0.5 else None

    verdict, delta = Verdict.INCONCLUSIVE, None
    if fit.r_squared >= r2_min:
        gev_ok = d_gev is not None and d_gev <= tol
        if d_an <= tol and not (gev_ok and d_gev < d_an):
            verdict = Verdict.ANALYTIC
        elif gev_ok:
            verdict, delta = Verdict.GEVREY, 1.0 / (2.0 * s)

    lam = result.lambdas
    sup_scaled = float(np.max(np.abs(lam) ** (2 * s) * result.norms))
    return RegularityVerdict(
        verdict=verdict,
        s=s,
        delta=delta,
        fitted_slope=fit.slope,
        tolerance=tol,
        evidence=fit,
        distance_analytic=d_an,
        distance_gevrey=d_gev,
        sup_scaled_norm=sup_scaled,
        sweep=result,
    )
