"""Base spectra, power-law symbols and the per-mode generator blocks.

All four operators A1, A2, B1, B2 are functions of one self-adjoint base
operator A with eigenvalues omega_1 <= omega_2 <= ...  On the k-th eigenmode
the generator reduces to a real 4x4 block acting on energy coordinates

    (p, v, q, z) = (sqrt(a1) u, v, sqrt(a2) w, z),

in which the energy norm of the modal state is the Euclidean norm.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import CoercivityError, ConfigError, FiniteSpectrumWarning

__all__ = [
    "SpectrumKind",
    "BaseSpectrum",
    "PowerSymbol",
    "SpectralSymbols",
    "SystemConfig",
    "ModeBlock",
    "HypothesisReport",
    "build_spectrum",
    "load_spectrum_file",
    "block_from_values",
    "block_matrices",
    "mode_block",
    "verify_hypotheses",
    "dissipation_rate",
]


class SpectrumKind(str, enum.Enum):
    DIRICHLET_1D = "dirichlet_1d"
    DIRICHLET_2D_RECTANGLE = "dirichlet_2d_rectangle"
    HINGED_PLATE_1D = "hinged_plate_1d"
    HINGED_PLATE_2D = "hinged_plate_2d"
    CUSTOM_FILE = "custom_file"


@dataclass(frozen=True)
class BaseSpectrum:
    """Eigenvalues of the base operator A, sorted ascending."""

    kind: SpectrumKind
    params: Mapping[str, object]
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size == 0:
            raise ConfigError("spectrum must be a nonempty list of eigenvalues")
        if not np.all(np.isfinite(values)) or np.any(values <= 0):
            raise ConfigError("spectrum values must be finite and positive")
        if np.any(np.diff(values) < 0):
            raise ConfigError("spectrum values must be nondecreasing")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "params", dict(self.params))

    def __len__(self):
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, BaseSpectrum):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.params == other.params
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None


def _positive(params, key):
    try:
        value = float(params[key])
    except KeyError:
        raise ConfigError(f"spectrum parameter {key!r} is required") from None
    except (TypeError, ValueError):
        raise ConfigError(f"spectrum parameter {key!r} must be a number") from None
    if not (value > 0 and math.isfinite(value)):
        raise ConfigError(f"spectrum parameter {key!r} must be positive, got {value}")
    return value


def _rectangle_values(lx, ly, n):
    # Lowest n of (i pi/lx)^2 + (j pi/ly)^2, i, j >= 1; grow the search radius
    # until the ellipse holds at least n lattice points.
    cx, cy = (math.pi / lx) ** 2, (math.pi / ly) ** 2
    radius = cx + cy + 4.0 * n * math.sqrt(cx * cy) / math.pi
    while True:
        imax = int(math.sqrt(radius / cx)) + 1
        jmax = int(math.sqrt(radius / cy)) + 1
        i = np.arange(1, imax + 1, dtype=np.float64)
        j = np.arange(1, jmax + 1, dtype=np.float64)
        vals = (cx * i * i)[:, None] + (cy * j * j)[None, :]
        vals = vals[vals <= radius]
        if vals.size >= n:
            return np.sort(vals)[:n]
        radius *= 2.0


def load_spectrum_file(path):
    """Read one positive eigenvalue per line; '#' starts a comment."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read spectrum file {path}: {exc}") from exc
    values = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            value = float(line)
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: not a number: {line!r}") from None
        if not (value > 0 and math.isfinite(value)):
            raise ConfigError(f"{path}:{lineno}: eigenvalue must be positive, got {line!r}")
        values.append(value)
    if not values:
        raise ConfigError(f"spectrum file {path} holds no eigenvalues")
    values = np.asarray(values)
    if np.any(np.diff(values) < 0):
        warnings.warn(f"spectrum file {path} is not sorted; sorting", stacklevel=3)
        values = np.sort(values)
    return values


def build_spectrum(kind, params, n_modes=None):
    """Build the lowest ``n_modes`` eigenvalues of a base operator.

    ``params`` holds ``length`` for the 1D kinds, ``lx``/``ly`` for the
    rectangle kinds and ``path`` for ``custom_file``.  For ``custom_file``
    ``n_modes`` may be omitted (whole file) or truncate to the lowest modes.
    """
    kind = SpectrumKind(kind)
    params = dict(params)
    if kind is not SpectrumKind.CUSTOM_FILE or n_modes is not None:
        if n_modes is None or int(n_modes) != n_modes or n_modes < 1:
            raise ConfigError(f"mode count must be an integer >= 1, got {n_modes!r}")
        n_modes = int(n_modes)

    if kind in (SpectrumKind.DIRICHLET_1D, SpectrumKind.HINGED_PLATE_1D):
        length = _positive(params, "length")
        k = np.arange(1, n_modes + 1, dtype=np.float64)
        values = (k * (math.pi / length)) ** 2
        if kind is SpectrumKind.HINGED_PLATE_1D:
            values = values**2
    elif kind in (SpectrumKind.DIRICHLET_2D_RECTANGLE, SpectrumKind.HINGED_PLATE_2D):
        lx, ly = _positive(params, "lx"), _positive(params, "ly")
        values = _rectangle_values(lx, ly, n_modes)
        if kind is SpectrumKind.HINGED_PLATE_2D:
            values = values**2
    else:
        if "path" not in params:
            raise ConfigError("custom_file spectrum needs a 'path' parameter")
        values = load_spectrum_file(params["path"])
        if n_modes is not None:
            if n_modes > values.size:
                raise ConfigError(
                    f"requested {n_modes} modes but {params['path']} lists {values.size}"
                )
            values = values[:n_modes]
    return BaseSpectrum(kind, params, values)


@dataclass(frozen=True)
class PowerSymbol:
    """The eigenvalue ``coef * omega**exp`` of an operator on a base mode."""

    coef: float
    exp: float

    def __post_init__(self):
        object.__setattr__(self, "coef", float(self.coef))
        object.__setattr__(self, "exp", float(self.exp))
        if not (self.coef > 0 and math.isfinite(self.coef)):
            raise ConfigError(f"symbol coefficient must be positive, got {self.coef}")
        if not 0.0 <= self.exp <= 2.0:
            raise ConfigError(f"symbol exponent must lie in [0, 2], got {self.exp}")

    def __call__(self, omega):
        return self.coef * np.power(omega, self.exp)

    @classmethod
    def parse(cls, text):
        parts = [p.strip() for p in str(text).split(",")]
        if len(parts) != 2:
            raise ConfigError(f"symbol must be 'coef,exp', got {text!r}")
        try:
            return cls(float(parts[0]), float(parts[1]))
        except ValueError:
            raise ConfigError(f"symbol must be 'coef,exp', got {text!r}") from None

    def __str__(self):
        return f"{self.coef!r},{self.exp!r}"


@dataclass(frozen=True)
class SpectralSymbols:
    a1: PowerSymbol
    a2: PowerSymbol
    b1: PowerSymbol
    b2: PowerSymbol

    @classmethod
    def fractional(cls, mu, theta, a1=None, a2=None):
        """B1 = A1**mu and B2 = A2**theta exactly; A1 = A2 = A unless given."""
        a1 = a1 or PowerSymbol(1.0, 1.0)
        a2 = a2 or PowerSymbol(1.0, 1.0)
        return cls(
            a1=a1,
            a2=a2,
            b1=PowerSymbol(a1.coef**mu, mu * a1.exp),
            b2=PowerSymbol(a2.coef**theta, theta * a2.exp),
        )


@dataclass(frozen=True)
class HypothesisReport:
    """Extremal ratios realizing the operator inequalities over the listed modes.

    ``witnesses`` maps each constant name to ``(mode_index, ratio)`` with a
    zero-based mode index.
    """

    alpha0: float
    alpha1: float
    alpha2: float
    beta1_const: float
    beta2_const: float
    coercive: bool
    coercivity_margin: float
    witnesses: Mapping[str, tuple]
    at_last_mode: tuple = ()

    def as_dict(self):
        out = {
            "alpha0": self.alpha0,
            "alpha1": self.alpha1,
            "alpha2": self.alpha2,
            "beta1": self.beta1_const,
            "beta2": self.beta2_const,
            "coercive": self.coercive,
            "coercivity_margin": self.coercivity_margin,
        }
        for name, (index, ratio) in self.witnesses.items():
            out[f"{name}_mode"] = index + 1
        out["extremal_at_last_mode"] = ",".join(self.at_last_mode) or "none"
        return out


def _extremes(ratio, name_min, name_max):
    imin = int(np.argmin(ratio))
    imax = int(np.argmax(ratio))
    flagged = []
    if ratio.size > 1:
        head = ratio[:-1]
        last = ratio[-1]
        if last < head.min() * (1 - 1e-9):
            flagged.append(name_min)
        if last > head.max() * (1 + 1e-9):
            flagged.append(name_max)
    return (imin, float(ratio[imin])), (imax, float(ratio[imax])), flagged


def _hypotheses(alpha, beta, gamma, mu, theta, symbols, spectrum, warn=True):
    omega = spectrum.values
    a1, a2 = symbols.a1(omega), symbols.a2(omega)
    b1, b2 = symbols.b1(omega), symbols.b2(omega)

    _, w_a0, f0 = _extremes(b1 / b2, "alpha0_inf", "alpha0")
    w_a1, w_a2, f1 = _extremes(b1 / a1**mu, "alpha1", "alpha2")
    w_b1, w_b2, f2 = _extremes(b2 / a2**theta, "beta1", "beta2")
    flagged = tuple(f for f in f0 + f1 + f2 if f != "alpha0_inf")
    if warn and flagged:
        warnings.warn(
            "extremal ratio attained at the last listed mode for "
            + ", ".join(flagged)
            + "; the bound is verified on the truncated spectrum only",
            FiniteSpectrumWarning,
            stacklevel=3,
        )
    alpha0 = w_a0[1]
    margin = alpha * gamma - beta * beta * alpha0
    return HypothesisReport(
        alpha0=alpha0,
        alpha1=w_a1[1],
        alpha2=w_a2[1],
        beta1_const=w_b1[1],
        beta2_const=w_b2[1],
        coercive=bool(margin > 0),
        coercivity_margin=float(margin),
        witnesses={
            "alpha0": w_a0,
            "alpha1": w_a1,
            "alpha2": w_a2,
            "beta1": w_b1,
            "beta2": w_b2,
        },
        at_last_mode=flagged,
    )


@dataclass(frozen=True)
class SystemConfig:
    """The coupled damped system: constants, exponents, symbols and spectrum.

    Construction rejects non-coercive damping (alpha*gamma <= beta**2*alpha0)
    unless ``allow_noncoercive`` is set.
    """

    alpha: float
    beta: float
    gamma: float
    mu: float
    theta: float
    spectrum: BaseSpectrum
    symbols: SpectralSymbols = None
    allow_noncoercive: bool = False

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "mu", "theta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ConfigError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.alpha <= 0:
            raise ConfigError(f"alpha must be positive, got {self.alpha}")
        if self.gamma <= 0:
            raise ConfigError(f"gamma must be positive, got {self.gamma}")
        if self.beta == 0:
            raise ConfigError("beta must be a nonzero real constant")
        for name in ("mu", "theta"):
            if not 0 < getattr(self, name) <= 1:
                raise ConfigError(f"{name} must lie in (0, 1], got {getattr(self, name)}")
        if self.symbols is None:
            object.__setattr__(self, "symbols", SpectralSymbols.fractional(self.mu, self.theta))
        report = self.hypotheses
        if not report.coercive and not self.allow_noncoercive:
            raise CoercivityError(
                f"damping is not coercive: alpha*gamma = {self.alpha * self.gamma!r} "
                f"<= beta^2*alpha0 = {self.beta**2 * report.alpha0!r}"
            )

    @property
    def s(self):
        return min(self.mu, self.theta)

    @property
    def omegas(self):
        return self.spectrum.values

    @cached_property
    def hypotheses(self):
        return _hypotheses(
            self.alpha, self.beta, self.gamma, self.mu, self.theta, self.symbols, self.spectrum
        )

    @cached_property
    def symbol_values(self):
        """(a1, a2, b1, b2) evaluated on every listed mode."""
        om = self.spectrum.values
        out = tuple(np.asarray(f(om), dtype=np.float64) for f in (
            self.symbols.a1, self.symbols.a2, self.symbols.b1, self.symbols.b2))
        for arr in out:
            arr.setflags(write=False)
        return out

    @cached_property
    def blocks(self):
        """Stacked generator blocks, shape (n_modes, 4, 4)."""
        a1, a2, b1, b2 = self.symbol_values
        m = block_matrices(a1, a2, b1, b2, self.alpha, self.beta, self.gamma)
        m.setflags(write=False)
        return m

    def replace(self, **changes):
        from dataclasses import replace

        return replace(self, **changes)


def block_matrices(a1, a2, b1, b2, alpha, beta, gamma):
    """Vectorized generator blocks for arrays of symbol values."""
    a1, a2, b1, b2 = np.broadcast_arrays(*(np.asarray(x, dtype=np.float64) for x in (a1, a2, b1, b2)))
    m = np.zeros(a1.shape + (4, 4))
    r1, r2 = np.sqrt(a1), np.sqrt(a2)
    m[..., 0, 1] = r1
    m[..., 1, 0] = -r1
    m[..., 1, 1] = -alpha * b1
    m[..., 1, 3] = -beta * b1
    m[..., 2, 3] = r2
    m[..., 3, 1] = -beta * b1
    m[..., 3, 2] = -r2
    m[..., 3, 3] = -gamma * b2
    return m


@dataclass(frozen=True)
class ModeBlock:
    omega: float
    a1: float
    a2: float
    b1: float
    b2: float
    matrix: np.ndarray = field(repr=False)


def block_from_values(omega, a1, a2, b1, b2, alpha, beta, gamma):
    """Build a block from raw symbol values, bypassing SystemConfig validation.

    Useful for the decoupled case beta = 0, which SystemConfig rejects.
    """
    if not omega > 0:
        raise ConfigError(f"omega must be positive, got {omega}")
    m = block_matrices(a1, a2, b1, b2, alpha, beta, gamma)
    m.setflags(write=False)
    return ModeBlock(float(omega), float(a1), float(a2), float(b1), float(b2), m)


def mode_block(config: SystemConfig, omega: float) -> ModeBlock:
    if not omega > 0:
        raise ConfigError(f"omega must be positive, got {omega}")
    sym = config.symbols
    return block_from_values(
        omega, sym.a1(omega), sym.a2(omega), sym.b1(omega), sym.b2(omega),
        config.alpha, config.beta, config.gamma,
    )


def verify_hypotheses(config: SystemConfig) -> HypothesisReport:
    return config.hypotheses


def dissipation_rate(block: ModeBlock, Z) -> float:
    """Re <M Z, Z> for an energy-coordinate vector Z in C^4."""
    Z = np.asarray(Z, dtype=np.complex128)
    return float(np.real(np.vdot(Z, block.matrix @ Z)))
