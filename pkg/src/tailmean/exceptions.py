"""Exception types shared across the package."""


class InvalidParameterError(ValueError):
    """A parameter is outside its documented domain."""


class InvalidCovarianceError(InvalidParameterError):
    """A covariance input is not symmetric positive semidefinite."""


class DataFormatError(ValueError):
    """Input data could not be parsed or contains non-finite entries."""


class NoSolutionError(ValueError):
    """The requested level is outside the range the score function can reach."""


class InfeasibleCutoffError(NoSolutionError):
    """The cutoff is too large for the truncation level; intervals would be unbounded."""
