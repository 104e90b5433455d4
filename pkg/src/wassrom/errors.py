"""Exception types raised across the package."""


class InvalidMeasureError(ValueError):
    """Density is negative, non-finite or carries no mass."""


class DomainViolationError(ValueError):
    """Quantile values fall outside the spatial domain."""


class IncompatibleGridError(ValueError):
    """Operands live on different quantile or spatial grids."""


class InvalidWeightsError(ValueError):
    """Barycentric weights are not in the probability simplex."""


class TangentOutsideDomainError(ValueError):
    """Exp-map argument leaves the set of admissible tangent vectors.

    ``max_descent`` is the largest decrease between consecutive quantile
    values of ``icdf_w + f``.
    """

    def __init__(self, message, max_descent=0.0):
        super().__init__(message)
        self.max_descent = float(max_descent)


class SolverFailureError(RuntimeError):
    def __init__(self, message, history=()):
        super().__init__(message)
        self.history = list(history)


class NeighborhoodError(ValueError):
    """No training parameter was found in the interpolation neighborhood."""


class ParameterOutOfBoxError(ValueError):
    pass


class ConfigError(ValueError):
    pass
