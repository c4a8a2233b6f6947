"""Exception and warning types shared across the package."""


class ConfigError(ValueError):
    """Invalid system or run configuration."""


class CoercivityError(ConfigError):
    """The damping matrix is not coercive: alpha*gamma <= beta**2 * alpha0."""


class SingularResolventError(ArithmeticError):
    """i*lambda is (numerically) an eigenvalue of the generator block."""

    def __init__(self, lam, omega, sigma_min):
        self.lam = lam
        self.omega = omega
        self.sigma_min = sigma_min
        super().__init__(
            f"i*lambda on the spectrum: lambda={lam!r}, omega={omega!r}, "
            f"sigma_min={sigma_min:.3e}"
        )


class FitError(ArithmeticError):
    """Not enough samples to fit a decay exponent."""


class WitnessConfigError(ConfigError):
    """Configuration outside the A1 = A2, B1 = A^mu, B2 = A^theta, mu <= theta form."""


class FiniteSpectrumWarning(UserWarning):
    """An extremal ratio is attained at the last listed mode; the bound may not hold
    uniformly over the untruncated spectrum."""


class TruncationWarning(UserWarning):
    """A resolvent sweep runs past the largest resonance of the listed spectrum."""
