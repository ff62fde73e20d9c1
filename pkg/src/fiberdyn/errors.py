"""Exception types shared across the package."""


class FiberdynError(Exception):
    """Base class for all package errors."""


class ConfigError(FiberdynError):
    """A configuration file or system description failed validation."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")


class BackwardNotInvertible(FiberdynError):
    """Backward iteration requested on a non-invertible fiber map."""


class NotHyperbolic(FiberdynError):
    """The fiber matrix has no real eigenvalue of modulus > 1."""


class EpsilonTooLarge(FiberdynError):
    """Scale parameter exceeds the injectivity scale of the torus."""


class BudgetExceeded(FiberdynError):
    """Predicted evaluation cost exceeds the configured budget."""

    def __init__(self, predicted, budget):
        self.predicted = predicted
        self.budget = budget
        super().__init__(f"predicted {predicted} fiber evaluations exceed budget {budget}")


class EmptySample(FiberdynError):
    """A spanning-count request received no sample points."""


class PointsTooFar(FiberdynError):
    """Local product requested on points outside the local-product radius."""


class SpacingTooSmall(FiberdynError):
    """Specification gaps are below the certified mixing gap."""


class NotAffine(FiberdynError):
    """Operation requires a globally affine hyperbolic fiber structure."""
