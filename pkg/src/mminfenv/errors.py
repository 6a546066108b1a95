"""Exception types shared across the package."""


class ModelError(ValueError):
    """The model (or a model file) violates a structural requirement."""


class NumericError(RuntimeError):
    """A computation broke down numerically (singularity, overflow, lost positivity)."""


class EstimationError(RuntimeError):
    """A simulation estimate cannot be produced from the given configuration."""
