"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when input data violates a documented contract."""


class StrategyError(ValueError):
    """Raised when an initialization strategy is not applicable to the data."""


class ComputationError(RuntimeError):
    """Raised when a numerical routine produces non-finite values or stalls."""


class InferenceError(RuntimeError):
    """Raised when debiased inference cannot be carried out."""
