"""Exception hierarchy shared across the package."""


class SixLevelError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(SixLevelError):
    """Malformed or inconsistent configuration input (CLI exit code 2)."""


class NumericalError(SixLevelError):
    """A numerical procedure failed or left its validity domain (CLI exit code 3)."""


class EITPoleError(NumericalError):
    """A susceptibility denominator vanished (evaluation at a transparency pole)."""


class SingularSteadyStateError(NumericalError):
    """The steady-state linear system is singular at the supplied parameters."""


class IntegrationError(NumericalError):
    """The adaptive integrator failed (step-size underflow / stiffness)."""


class NonperturbativeFitError(NumericalError):
    """Intensity grid too large: the perturbative fit is contaminated."""
