"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Base class for configuration validation failures."""


class MissingKey(ConfigError):
    def __init__(self, key):
        self.key = key
        super().__init__(f"missing required configuration key: {key!r}")


class OutOfRange(ConfigError):
    def __init__(self, key, value, constraint):
        self.key = key
        self.value = value
        super().__init__(f"configuration key {key!r}={value!r} violates: {constraint}")


class GridMisaligned(ConfigError):
    """d_cca + d_tat must be an integer multiple of the backoff period."""

    def __init__(self, d_cca, d_tat, d_bp):
        super().__init__(
            f"d_cca + d_tat = {d_cca + d_tat} symbols is not a multiple of "
            f"d_bp = {d_bp}; CCA landings would leave the slot grid"
        )


class NormalizationViolation(ArithmeticError):
    """Residual-node probabilities failed to sum to 1 within tolerance."""


class InvalidComposition(ValueError):
    """Node composition counts are negative or do not sum to the residual count."""


class EmptyChainSet(ValueError):
    """Metrics were requested for an empty set of finalized chains."""


class BudgetExceeded(RuntimeError):
    """The chain-count safety cap was hit; results are partial."""

    def __init__(self, cap, examined, finalized):
        self.cap = cap
        self.examined = examined
        self.finalized = finalized
        self.partial = True
        super().__init__(
            f"chain budget exceeded: examined {examined} chains "
            f"(cap {cap}), {finalized} finalized; results are partial"
        )


class TreeTooLarge(ValueError):
    """Exhaustive enumeration would exceed the joint-choice-tree leaf limit."""
