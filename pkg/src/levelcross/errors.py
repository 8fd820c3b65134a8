"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """A model object or run configuration violates its construction contract."""


class ContractViolationError(ValueError):
    """An evaluator was called outside its stated domain (e.g. nonzero means)."""


class DegenerateCovarianceError(ArithmeticError):
    """The planar covariance Y1*Y3 - Y2^2 is numerically non-positive-definite."""


class DegeneratePointError(ArithmeticError):
    """All basis functions vanish at the evaluation point (B0 = 0)."""


class BoundaryHitError(RuntimeError):
    """A zero of the sampled sum lies on (or too close to) the region boundary."""


class DiscardRateError(RuntimeError):
    """Too many Monte Carlo trials were discarded due to boundary hits."""
