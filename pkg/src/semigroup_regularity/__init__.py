"""Numerical regularity probes for coupled elastic systems with fractional damping.

Two abstract wave equations coupled through their damping terms,

    y'' + A1 y + alpha B1 y' + beta B1 z' = 0
    z'' + A2 z + beta B1 y' + gamma B2 z' = 0,

with B1 ~ A1**mu and B2 ~ A2**theta, are reduced to 4x4 blocks over a shared
eigenbasis.  The package measures resolvent decay along the imaginary axis,
classifies the semigroup as analytic or Gevrey, and evaluates the explicit
unit vectors showing the Gevrey rate cannot be improved.
"""

__version__ = "0.1.0"

from .errors import (
    CoercivityError,
    ConfigError,
    FiniteSpectrumWarning,
    FitError,
    SingularResolventError,
    TruncationWarning,
    WitnessConfigError,
)
from .spectral_model import (
    BaseSpectrum,
    HypothesisReport,
    ModeBlock,
    PowerSymbol,
    SpectralSymbols,
    SpectrumKind,
    SystemConfig,
    block_from_values,
    build_spectrum,
    dissipation_rate,
    mode_block,
    verify_hypotheses,
)
from .resolvent_probe import (
    ADAPTIVE,
    FULL,
    ScanPolicy,
    Verdict,
    block_resolvent_norm,
    classify,
    fit_decay_exponent,
    global_resolvent_norm,
    sweep,
)
from .optimality_witness import (
    lower_bound_crosscheck,
    optimality_trend,
    plateau_limit,
    witness_element,
    witness_sequence,
)
from .evolution import (
    ModalState,
    block_eigenvalues,
    block_exponential,
    evolve,
    smoothing_probe,
    spectral_portrait,
)
from .dense_oracle import assemble_dense, dense_expm_check, dense_resolvent_norm
