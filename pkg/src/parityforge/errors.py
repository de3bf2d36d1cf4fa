"""Exception types shared across the package."""


class TailOverflow(Exception):
    """Raised when a state leaks more population past the truncation
    boundary than the configured tail tolerance allows."""

    def __init__(self, tail: float, tolerance: float, what: str = "state"):
        self.tail = tail
        self.tolerance = tolerance
        super().__init__(
            f"{what}: truncated tail mass {tail:.3e} exceeds tolerance {tolerance:.1e}"
        )


class ZeroProbability(Exception):
    """Raised when a post-selected measurement branch has probability
    below the resolvable threshold (1e-12)."""

    def __init__(self, probability: float, step: int | None = None):
        self.probability = probability
        self.step = step
        where = "" if step is None else f" at step {step}"
        super().__init__(f"measurement branch probability {probability:.3e}{where}")


class DimensionMismatch(ValueError):
    """Two states or operators live in different truncated spaces."""


class NotHermitian(ValueError):
    """An operator required to be Hermitian is not."""


class EvenM(ValueError):
    """The symmetric measurement ansatz only admits an odd number of
    measurements."""


class ConfigError(ValueError):
    """A run configuration failed validation; the message lists all
    violations."""
