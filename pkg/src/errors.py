"""
Error types
Exception hierarchy shared by the numerical modules and mapped to CLI exit codes.
"""


class NonlocalHirotaError(Exception):
    """Base class for every error raised by this package."""

    exit_code = 1


class ConfigError(NonlocalHirotaError, ValueError):
    """Experiment configuration is missing, ill-typed or inconsistent."""

    exit_code = 2


class AssumptionError(NonlocalHirotaError):
    """A standing assumption of the asymptotic analysis does not hold."""

    exit_code = 3


class ValidationFailure(NonlocalHirotaError):
    """One or more invariant suites failed."""

    exit_code = 3

    def __init__(self, message: str, failed: list = None):
        super().__init__(message)
        self.failed = failed or []


class NumericalError(NonlocalHirotaError, ArithmeticError):
    """A numerical kernel could not deliver a trustworthy value."""

    exit_code = 4


class GammaPoleError(NumericalError):
    pass


class DomainError(NumericalError):
    pass


class StepSizeError(NumericalError):
    pass


class QuadratureError(NumericalError):
    pass


class BlowUpError(NumericalError):
    pass


class ProximityError(NumericalError):
    pass


class GridError(ConfigError):
    pass


class DecayContractError(AssumptionError):
    pass


class SpectralSingularityError(AssumptionError):
    def __init__(self, message: str, z: float = None):
        super().__init__(message)
        self.z = z


class DegeneratePhaseError(AssumptionError):
    pass


class BranchJumpError(AssumptionError):
    pass


class SubcriticalityError(AssumptionError):
    pass


class PhaseIdentityError(NumericalError):
    pass
