"""Brute-force dense assembly of a truncated generator, for cross-checks only."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import ConfigError, SingularResolventError
from .evolution import ModalState, propagate
from .resolvent_probe import FULL, SINGULAR_FLOOR, global_resolvent_norm
from .spectral_model import BaseSpectrum, SystemConfig

__all__ = [
    "MAX_MODES",
    "DenseSystem",
    "OracleReport",
    "assemble_dense",
    "truncate",
    "dense_resolvent_norm",
    "dense_expm_check",
    "oracle_report",
]

MAX_MODES = 256


def truncate(config: SystemConfig, n_modes: int) -> SystemConfig:
    """The same system restricted to its lowest ``n_modes`` modes."""
    if n_modes == len(config.spectrum):
        return config
    sp = config.spectrum
    params = dict(sp.params, truncated=n_modes)
    return config.replace(spectrum=BaseSpectrum(sp.kind, params, sp.values[:n_modes]))


@dataclass(frozen=True)
class DenseSystem:
    n_modes: int
    matrix: np.ndarray = field(repr=False)
    config: SystemConfig = field(repr=False)


def assemble_dense(config: SystemConfig, n_modes=None) -> DenseSystem:
    """Block-diagonal 4N x 4N matrix; mode k occupies rows/cols 4k..4k+3."""
    n_avail = len(config.spectrum)
    if n_modes is None:
        n_modes = min(n_avail, MAX_MODES)
    if not 1 <= n_modes <= min(MAX_MODES, n_avail):
        raise ConfigError(f"dense assembly needs 1 <= N <= {min(MAX_MODES, n_avail)}, got {n_modes}")
    matrix = scipy.linalg.block_diag(*config.blocks[:n_modes])
    return DenseSystem(n_modes, matrix, truncate(config, n_modes))


def dense_resolvent_norm(system: DenseSystem, lam: float) -> float:
    """1 / sigma_min(i lam I - A_N) from a full SVD of the dense matrix."""
    shifted = 1j * lam * np.eye(system.matrix.shape[0]) - system.matrix
    s = scipy.linalg.svdvals(shifted)
    if s[-1] <= SINGULAR_FLOOR * max(s[0], 1.0):
        raise SingularResolventError(lam, float("nan"), float(s[-1]))
    return float(1.0 / s[-1])


def dense_expm_check(system: DenseSystem, t: float, state: ModalState) -> float:
    """Max abs deviation between expm(t A_N) state and the per-mode evolution."""
    if not t >= 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    dense = scipy.linalg.expm(t * system.matrix) @ state.as_vector()
    modal = propagate(system.config, state, t).as_vector()
    return float(np.max(np.abs(dense - modal)))


@dataclass(frozen=True)
class OracleReport:
    n_modes: int
    max_resolvent_deviation: float
    max_expm_deviation: float
    resolvent_tol: float
    expm_tol: float

    @property
    def passed(self):
        return (
            self.max_resolvent_deviation <= self.resolvent_tol
            and self.max_expm_deviation <= self.expm_tol
        )

    def as_dict(self):
        return {
            "status": "pass" if self.passed else "fail",
            "n_modes": self.n_modes,
            "max_resolvent_deviation": self.max_resolvent_deviation,
            "max_expm_deviation": self.max_expm_deviation,
            "resolvent_tol": self.resolvent_tol,
            "expm_tol": self.expm_tol,
        }


def oracle_report(
    config: SystemConfig,
    n_modes=64,
    n_lambdas=20,
    times=(1.0,),
    seed=0,
    resolvent_tol=1e-10,
    expm_tol=1e-8,
) -> OracleReport:
    """Dense vs per-mode agreement at random frequencies and a random unit state.

    Resolvent deviations are relative to the per-mode value.
    """
    n_modes = min(n_modes, len(config.spectrum), MAX_MODES)
    system = assemble_dense(config, n_modes)
    rng = np.random.default_rng(seed)
    top = np.sqrt(max(system.config.symbol_values[0][-1], system.config.symbol_values[1][-1]))
    lambdas = rng.uniform(-2 * top, 2 * top, n_lambdas)
    res_dev = 0.0
    for lam in lambdas:
        dense = dense_resolvent_norm(system, lam)
        modal = global_resolvent_norm(system.config, lam, FULL).norm
        res_dev = max(res_dev, abs(dense - modal) / modal)
    state = ModalState.random(n_modes, rng)
    exp_dev = max(dense_expm_check(system, t, state) for t in times)
    return OracleReport(n_modes, res_dev, exp_dev, resolvent_tol, expm_tol)
