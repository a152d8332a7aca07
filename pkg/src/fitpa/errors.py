"""Exception hierarchy for fitpa."""


class FitPAError(Exception):
    """Base class for every error raised by this package."""


class ModelError(FitPAError, ValueError):
    pass


class NonConstantSum(ModelError):
    """gamma(a) + beta(a) is not the same constant for every colour pair."""


class NonPositiveSlope(ModelError):
    """Some gamma(a) <= 0."""


class InvalidColorLaw(ModelError):
    pass


class ZeroTotalWeight(FitPAError):
    """Every existing vertex has attachment weight zero for the newcomer."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message if step is None else f"{message} (step m={step})")
        self.step = step


class TooSmall(FitPAError, ValueError):
    pass


class TooLarge(FitPAError, ValueError):
    pass


class ZeroProbColor(FitPAError):
    pass


class ImpossibleTree(FitPAError):
    """The tree has probability zero under the model."""


class UndefinedConditional(FitPAError):
    """A conditional law omega(.|a) was requested for a pair with zero mass."""


class DegenerateTilt(FitPAError, ValueError):
    pass


class Infeasible(FitPAError):
    pass


class NotConverged(FitPAError):
    def __init__(self, message: str, best=None):
        super().__init__(message)
        self.best = best


class ConfigError(FitPAError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line
