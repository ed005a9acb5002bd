"""Exception types shared across frontlab modules."""


class FrontLabError(Exception):
    """Base class for all frontlab errors."""


class DomainError(FrontLabError):
    """An argument lies outside the mathematical domain of the operation."""


class BracketError(FrontLabError):
    """A root or minimum could not be bracketed on the scan interval."""


class IntegrationError(FrontLabError):
    """An ODE trajectory failed to reach the required configuration."""


class SolverError(FrontLabError):
    """A solver produced a result that violates a structural requirement."""


class RangeError(FrontLabError):
    """A requested evaluation point is outside the tabulated range."""


class TailError(FrontLabError):
    """A fitted asymptotic tail law disagrees with its expected exponent."""


class NumericsError(FrontLabError):
    """A numerical state became invalid (non-finite, non-monotone, overflow)."""


class LevelNotBracketed(FrontLabError):
    """A level crossing is not bracketed by enough finite samples."""


class DataError(FrontLabError):
    """Input data is too sparse or too short for the requested estimate."""


class CascadeError(FrontLabError):
    """A freeze event could not be located inside its piece."""


class DegreeError(FrontLabError):
    """Polynomial degree grew beyond the supported conditioning bound."""


class FitError(FrontLabError):
    """A least-squares design matrix is too ill-conditioned to trust."""


class SignalError(FrontLabError):
    """A measured signal is below its estimated noise floor."""
