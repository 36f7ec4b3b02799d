"""Exception types shared across the package."""


class SingularPointError(ValueError):
    """A quantile-side quantity is evaluated where it is undefined (e.g. F^{-1}(u)=0)."""


class NonconvergenceError(RuntimeError):
    """A quadrature or extrapolation failed to reach its tolerance.

    Raised both for exhausted subdivision budgets and for integrals whose tail
    mass is detected as non-decaying (the integral is infinite or barely finite).
    """


class UnsupportedCostError(ValueError):
    """The requested operation is not defined for this cost kind."""


class DegenerateSampleError(ValueError):
    """A sample column is constant and rank/density machinery cannot proceed."""
