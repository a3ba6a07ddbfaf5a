class ScaleMixError(Exception):
    """Base class for all errors raised by scalemix."""


class InvalidStateError(ScaleMixError, ValueError):
    """A parameter state is not usable (e.g. Sigma is not positive definite)."""


class DegenerateWeightsError(ScaleMixError, ValueError):
    """Latent weights produce a singular weighted design."""


class ParameterError(ScaleMixError, ValueError):
    """Distribution parameters outside their legal range."""


class UnsupportedDegenerateError(ScaleMixError, ValueError):
    """The generic psi sampler was asked for s = 0, which has no finite envelope."""


class RatioInfiniteError(ScaleMixError, ArithmeticError):
    """The numerator of the key ratio diverges."""


class NotIntegrableError(ScaleMixError, ArithmeticError):
    """A density could not be normalized on the search grid."""


class ConditionUnknownError(ScaleMixError, ValueError):
    """The PX-DA integrability condition could not be established."""


class UnsupportedCaseError(ScaleMixError, ValueError):
    """Exact posterior sampling requested outside the solvable special case."""


class ConfigError(ScaleMixError, ValueError):
    """Invalid configuration text."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
