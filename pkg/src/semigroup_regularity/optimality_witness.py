"""Explicit unit vectors with small resolvent residual at lambda_n = sqrt(omega_n).

For A1 = A2 = A, B1 = A**mu, B2 = A**theta (mu <= theta) the state

    Z_n = (a_n e_n, i lam_n a_n e_n, c_n e_n, i lam_n c_n e_n)

with a_n = -(gamma/beta) omega^(theta-mu) c_n has (i lam_n - A) Z_n supported
in the second component only, of size

    |beta - alpha gamma/beta omega^(theta-mu)| omega^(mu+1/2) |c_n|,

so lam_n^(-r) times that residual tends to zero for every r > 2 mu.  Scalars
are evaluated in log space; the energy-coordinate state has O(1) entries and
is always materialized.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import WitnessConfigError
from .resolvent_probe import ADAPTIVE, block_resolvent_norm, global_resolvent_norm
from .spectral_model import PowerSymbol, SystemConfig, mode_block

__all__ = [
    "WitnessElement",
    "WitnessReport",
    "Trend",
    "CrosscheckRow",
    "CrosscheckReport",
    "check_witness_form",
    "witness_element",
    "witness_sequence",
    "witness_residual",
    "plateau_limit",
    "classify_trend",
    "optimality_trend",
    "lower_bound_crosscheck",
]

PLATEAU_BAND = 0.05


def check_witness_form(config: SystemConfig):
    sym = config.symbols
    unit = PowerSymbol(1.0, 1.0)
    if sym.a1 != unit or sym.a2 != unit:
        raise WitnessConfigError("witness needs a1 = a2 = omega (symbols '1,1')")
    if sym.b1 != PowerSymbol(1.0, config.mu) or sym.b2 != PowerSymbol(1.0, config.theta):
        raise WitnessConfigError("witness needs b1 = omega**mu and b2 = omega**theta")
    if config.mu > config.theta:
        raise WitnessConfigError(f"witness needs mu <= theta, got mu={config.mu}, theta={config.theta}")
    if not config.hypotheses.coercive:
        raise WitnessConfigError("witness needs a coercive configuration")


@dataclass(frozen=True)
class WitnessElement:
    omega: float
    lam: float
    a: complex
    c: complex
    state: np.ndarray = field(repr=False)
    residual_norm: float
    log_residual: float
    norm: float

    def scaled(self, r):
        """lam**(-r) * residual_norm, evaluated in log space."""
        return math.exp(self.log_residual - r * math.log(self.lam))


def witness_element(config: SystemConfig, omega: float) -> WitnessElement:
    check_witness_form(config)
    if not omega > 0:
        raise WitnessConfigError(f"omega must be positive, got {omega}")
    alpha, beta, gamma = config.alpha, config.beta, config.gamma
    mu, theta = config.mu, config.theta
    L = math.log(omega)
    gap = theta - mu

    # the residual factor vanishes where alpha*gamma = beta^2 omega^(mu-theta)
    x = math.log(alpha * gamma / beta**2) + gap * L
    if not x > 0:
        raise WitnessConfigError(
            f"alpha*gamma <= beta^2 omega^(mu-theta) at omega={omega}: damping not coercive there"
        )

    log_c = (mu - theta - 0.5) * L - 0.5 * math.log(2.0 * ((gamma / beta) ** 2 + math.exp(-2.0 * gap * L)))
    log_a = math.log(gamma / abs(beta)) + gap * L + log_c
    sign_a = -math.copysign(1.0, beta)
    # log|beta - alpha gamma/beta omega^gap| = log|beta| + log(e^x - 1)
    log_factor = math.log(abs(beta)) + x + math.log(-math.expm1(-x))
    log_res = log_factor + (mu + 0.5) * L + log_c

    lam = math.sqrt(omega)
    c = math.exp(log_c)
    a = sign_a * math.exp(log_a)
    pa = sign_a * math.exp(log_a + 0.5 * L)
    pc = math.exp(log_c + 0.5 * L)
    state = np.array([pa, 1j * pa, pc, 1j * pc], dtype=np.complex128)
    state.setflags(write=False)
    return WitnessElement(
        omega=float(omega),
        lam=lam,
        a=complex(a),
        c=complex(c),
        state=state,
        residual_norm=math.exp(log_res),
        log_residual=log_res,
        norm=float(np.linalg.norm(state)),
    )


def _omegas_for(config, mode_indices):
    n = len(config.spectrum)
    idx = np.asarray(list(mode_indices), dtype=np.intp)
    if idx.size == 0:
        raise WitnessConfigError("no mode indices given")
    if idx.min() < 1 or idx.max() > n:
        raise WitnessConfigError(f"mode indices must lie in 1..{n}")
    return np.sort(config.omegas[idx - 1])


def witness_sequence(config: SystemConfig, mode_indices) -> list:
    """Witness elements at the given one-based mode indices, omega increasing."""
    return [witness_element(config, float(w)) for w in _omegas_for(config, mode_indices)]


def witness_residual(config: SystemConfig, element: WitnessElement) -> np.ndarray:
    """(i lam - M) Z computed by applying the generator block to the state."""
    block = mode_block(config, element.omega)
    return 1j * element.lam * element.state - block.matrix @ element.state


def plateau_limit(config: SystemConfig) -> float:
    """Large-omega limit of lam^(-2 mu) * residual_norm."""
    check_witness_form(config)
    alpha, beta, gamma = config.alpha, config.beta, config.gamma
    if config.mu < config.theta:
        return alpha / math.sqrt(2.0)
    return abs(beta**2 - alpha * gamma) / math.sqrt(2.0 * (gamma**2 + beta**2))


class Trend(str, enum.Enum):
    VANISHING = "vanishing"
    PLATEAU = "plateau"
    DIVERGING = "diverging"


def classify_trend(values) -> Trend:
    """Plateau if the tail (second half) stays within a 5% band; otherwise
    vanishing or diverging by the direction of the tail."""
    values = np.asarray(values, dtype=np.float64)
    tail = values[len(values) // 2:] if values.size > 2 else values
    if tail.max() <= (1 + PLATEAU_BAND) * tail.min():
        return Trend.PLATEAU
    steps = np.diff(tail)
    if np.all(steps < 0):
        return Trend.VANISHING
    if np.all(steps > 0):
        return Trend.DIVERGING
    return Trend.VANISHING if tail[-1] < tail[0] else Trend.DIVERGING


@dataclass(frozen=True)
class WitnessReport:
    r: float
    points: tuple
    limit_estimate: float
    trend: Trend
    elements: tuple = field(repr=False, default=())

    def as_dict(self):
        return {
            "r": self.r,
            "n_points": len(self.points),
            "limit_estimate": self.limit_estimate,
            "trend": self.trend.value,
        }


def optimality_trend(config: SystemConfig, r: float, mode_indices=None, omegas=None) -> WitnessReport:
    """lam^(-r) * residual_norm along the witness sequence.

    Pass either one-based ``mode_indices`` into the config spectrum or explicit
    ``omegas``.
    """
    if not 0 < r <= 1:
        raise WitnessConfigError(f"r must lie in (0, 1], got {r}")
    if (mode_indices is None) == (omegas is None):
        raise WitnessConfigError("give exactly one of mode_indices or omegas")
    if omegas is None:
        elements = witness_sequence(config, mode_indices)
    else:
        elements = [witness_element(config, float(w)) for w in sorted(omegas)]
    points = tuple((e.omega, e.scaled(r)) for e in elements)
    values = [p[1] for p in points]
    return WitnessReport(
        r=float(r),
        points=points,
        limit_estimate=values[-1],
        trend=classify_trend(values),
        elements=tuple(elements),
    )


@dataclass(frozen=True)
class CrosscheckRow:
    omega: float
    lam: float
    resolvent_norm: float
    mode_norm: float
    lower_bound: float

    @property
    def holds(self):
        return self.resolvent_norm >= self.lower_bound and self.mode_norm >= self.lower_bound

    @property
    def ratio(self):
        return self.resolvent_norm / self.lower_bound


@dataclass(frozen=True)
class CrosscheckReport:
    rows: tuple

    @property
    def all_hold(self):
        return all(row.holds for row in self.rows)


def lower_bound_crosscheck(config: SystemConfig, mode_indices, scan=ADAPTIVE) -> CrosscheckReport:
    """Compare ||R(i lam_n)|| against 1/residual_norm at each witness frequency.

    A unit vector Z with ||(i lam - A) Z|| = rho forces ||R(i lam)|| >= 1/rho.
    """
    rows = []
    for e in witness_sequence(config, mode_indices):
        sample = global_resolvent_norm(config, e.lam, scan)
        mode_norm = block_resolvent_norm(mode_block(config, e.omega), e.lam)
        rows.append(CrosscheckRow(e.omega, e.lam, sample.norm, mode_norm, 1.0 / e.residual_norm))
    return CrosscheckReport(tuple(rows))
