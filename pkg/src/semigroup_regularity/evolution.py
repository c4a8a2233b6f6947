"""Per-mode semigroup evolution, block spectra and smoothing diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .resolvent_probe import fit_loglog
from .spectral_model import ModeBlock, SystemConfig

__all__ = [
    "ModalState",
    "TrajectorySample",
    "PortraitRow",
    "SmoothingReport",
    "expm_pade",
    "block_exponential",
    "propagate",
    "evolve",
    "block_eigenvalues",
    "spectral_portrait",
    "portrait_slope",
    "smoothing_probe",
]

# eigenvector condition number above which the Pade route is used
EIG_COND_LIMIT = 1e6
PADE_DEGREE = 8


def expm_pade(A):
    """exp(A) by scaling and squaring with a diagonal Pade approximant.

    Scales so that ||A/2^j||_inf <= 1/2; degree 8 keeps the truncation error
    below double-precision roundoff there.
    """
    A = np.asarray(A, dtype=np.complex128)
    n = A.shape[0]
    norm = np.linalg.norm(A, np.inf)
    j = max(0, int(np.ceil(np.log2(norm))) + 1) if norm > 0 else 0
    A = A / 2.0**j
    ident = np.eye(n, dtype=np.complex128)
    X = A.copy()
    c = 0.5
    N = ident + c * A
    D = ident - c * A
    q = PADE_DEGREE
    sign = 1.0
    for k in range(2, q + 1):
        c = c * (q - k + 1) / (k * (2 * q - k + 1))
        X = A @ X
        N = N + c * X
        sign = -sign
        D = D - sign * c * X
    F = np.linalg.solve(D, N)
    for _ in range(j):
        F = F @ F
    return F


def _check_time(t):
    if not t >= 0:
        raise ValueError(f"time must be nonnegative, got {t}")


class _ModalExponential:
    """Cached eigendecompositions of a stack of blocks; exp(tM) on demand."""

    def __init__(self, blocks):
        self.blocks = np.asarray(blocks, dtype=np.float64)
        w, V = np.linalg.eig(self.blocks)
        cond = np.linalg.cond(V)
        self.good = np.isfinite(cond) & (cond < EIG_COND_LIMIT)
        self.w = w
        self.V = V
        self.Vinv = np.zeros_like(V)
        if self.good.any():
            self.Vinv[self.good] = np.linalg.inv(V[self.good])

    def matrices(self, t):
        _check_time(t)
        n = self.blocks.shape[0]
        if t == 0:
            return np.broadcast_to(np.eye(4, dtype=np.complex128), (n, 4, 4)).copy()
        out = np.empty((n, 4, 4), dtype=np.complex128)
        g = self.good
        if g.any():
            out[g] = (self.V[g] * np.exp(t * self.w[g])[:, None, :]) @ self.Vinv[g]
        for k in np.flatnonzero(~g):
            out[k] = expm_pade(t * self.blocks[k])
        return out


def block_exponential(block: ModeBlock, t: float) -> np.ndarray:
    """exp(t M) for one mode block."""
    return _ModalExponential(block.matrix[None]).matrices(t)[0]


@dataclass(frozen=True)
class ModalState:
    """Energy coordinates (p, v, q, z) per mode, shape (n_modes, 4)."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128)
        if c.ndim == 1:
            if c.size % 4:
                raise ConfigError(f"flat state length {c.size} is not a multiple of 4")
            c = c.reshape(-1, 4)
        if c.ndim != 2 or c.shape[1] != 4:
            raise ConfigError(f"state must have shape (n_modes, 4), got {c.shape}")
        if not np.all(np.isfinite(c)):
            raise ConfigError("state must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n_modes(self):
        return self.coeffs.shape[0]

    @property
    def norm(self):
        return float(np.linalg.norm(self.coeffs))

    def as_vector(self):
        return self.coeffs.reshape(-1)

    @classmethod
    def zeros(cls, n_modes):
        return cls(np.zeros((n_modes, 4)))

    @classmethod
    def random(cls, n_modes, rng, unit=True):
        c = rng.standard_normal((n_modes, 4)) + 1j * rng.standard_normal((n_modes, 4))
        if unit:
            c /= np.linalg.norm(c)
        return cls(c)


@dataclass(frozen=True)
class TrajectorySample:
    t: float
    energy_norm: float
    generator_norm: float
    per_mode: np.ndarray = field(repr=False, default=None)
    state: ModalState = field(repr=False, default=None)


def _check_state(config, state):
    if state.n_modes != len(config.spectrum):
        raise ConfigError(
            f"state has {state.n_modes} modes but the spectrum lists {len(config.spectrum)}"
        )


def propagate(config: SystemConfig, state: ModalState, t: float) -> ModalState:
    """S(t) applied to a modal state, mode by mode."""
    _check_state(config, state)
    E = _ModalExponential(config.blocks).matrices(t)
    return ModalState(np.einsum("kij,kj->ki", E, state.coeffs))


def evolve(config: SystemConfig, initial: ModalState, t_grid) -> list:
    _check_state(config, initial)
    t_grid = np.asarray(t_grid, dtype=np.float64)
    if t_grid.ndim != 1 or t_grid.size == 0:
        raise ConfigError("time grid must be a nonempty 1D sequence")
    if t_grid[0] < 0 or np.any(np.diff(t_grid) <= 0):
        raise ConfigError("time grid must be increasing and start at t >= 0")
    expo = _ModalExponential(config.blocks)
    blocks = config.blocks
    out = []
    for t in t_grid:
        coeffs = np.einsum("kij,kj->ki", expo.matrices(float(t)), initial.coeffs)
        gen = np.einsum("kij,kj->ki", blocks, coeffs)
        out.append(
            TrajectorySample(
                t=float(t),
                energy_norm=float(np.linalg.norm(coeffs)),
                generator_norm=float(np.linalg.norm(gen)),
                per_mode=np.linalg.norm(coeffs, axis=1),
                state=ModalState(coeffs),
            )
        )
    return out


def _sorted_eigenvalues(w):
    order = np.lexsort((w.imag, w.real), axis=-1)
    return np.take_along_axis(w, order, axis=-1)


def block_eigenvalues(block: ModeBlock) -> np.ndarray:
    """Eigenvalues of M sorted by real part, then imaginary part."""
    return _sorted_eigenvalues(np.linalg.eigvals(block.matrix).astype(np.complex128))


def _mode_slice(config, mode_range):
    n = len(config.spectrum)
    if mode_range is None:
        return 0, n
    first, last = mode_range
    if first < 1 or last > n or first > last:
        raise ConfigError(f"mode range must satisfy 1 <= first <= last <= {n}, got {mode_range}")
    return first - 1, last


@dataclass(frozen=True)
class PortraitRow:
    omega: float
    re: float
    im: float


def spectral_portrait(config: SystemConfig, mode_range=None) -> list:
    """(omega, Re, Im) rows, four per mode; ``mode_range`` is one-based inclusive."""
    lo, hi = _mode_slice(config, mode_range)
    w = np.linalg.eigvals(config.blocks[lo:hi]).astype(np.complex128)
    w = _sorted_eigenvalues(w)
    rows = []
    for omega, ws in zip(config.omegas[lo:hi], w):
        rows.extend(PortraitRow(float(omega), float(z.real), float(z.imag)) for z in ws)
    return rows


def portrait_slope(rows, tail_fraction=0.5) -> float:
    """Slope of log|Re| against log|eigenvalue| for the most damped eigenvalue
    of each mode, over the upper ``tail_fraction`` of the modes.

    A slope of 1 means the spectrum opens in a sector; 2s < 1 means the
    damped branch bends towards the imaginary axis like |Im|**(2s).
    """
    re = np.array([r.re for r in rows]).reshape(-1, 4)
    im = np.array([r.im for r in rows]).reshape(-1, 4)
    # rows are sorted by real part, so column 0 is the most damped
    x = np.hypot(re[:, 0], im[:, 0])
    y = np.abs(re[:, 0])
    start = int(len(x) * (1 - tail_fraction))
    return fit_loglog(x[start:], y[start:])[0]


@dataclass(frozen=True)
class SmoothingReport:
    t: np.ndarray
    sup_norm: np.ndarray
    argmax_omega: np.ndarray
    slope: float | None
    intercept: float | None
    r_squared: float | None


def smoothing_probe(config: SystemConfig, t_list, tail_fraction=0.5) -> SmoothingReport:
    """sup over modes of ||M exp(tM)|| for each t, with a log-log slope fitted
    over the smallest ``tail_fraction`` of the times (needs 3 or more)."""
    t_arr = np.sort(np.asarray(t_list, dtype=np.float64))
    if t_arr.size == 0 or np.any(t_arr <= 0):
        raise ValueError("smoothing probe times must be positive")
    blocks = config.blocks
    expo = _ModalExponential(blocks)
    sup = np.empty(t_arr.size)
    arg = np.empty(t_arr.size)
    for i, t in enumerate(t_arr):
        prod = blocks @ expo.matrices(float(t))
        norms = np.linalg.svd(prod, compute_uv=False)[:, 0]
        k = int(np.argmax(norms))
        sup[i], arg[i] = norms[k], config.omegas[k]
    n_fit = max(3, int(np.ceil(t_arr.size * tail_fraction)))
    slope = intercept = r2 = None
    if t_arr.size >= 3:
        slope, intercept, r2 = fit_loglog(t_arr[:n_fit], sup[:n_fit])
    return SmoothingReport(t_arr, sup, arg, slope, intercept, r2)
