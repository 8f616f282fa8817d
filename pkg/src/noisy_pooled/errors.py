"""Exception types raised across the package."""


class InvalidConfigError(ValueError):
    """A problem, noise or experiment configuration violates its invariants."""


class DimensionMismatchError(ValueError):
    """Arrays handed to an operation disagree in shape."""


class EmptyGraphError(ValueError):
    """An aggregate was requested on a pooling graph without queries."""


class ResourceBudgetError(MemoryError):
    """A dense allocation would exceed the configured entry budget."""

    def __init__(self, requested, limit):
        self.requested = requested
        self.limit = limit
        super().__init__(
            f"dense design matrix needs {requested} entries, "
            f"budget is max_entries={limit}"
        )


class AmpDivergenceError(FloatingPointError):
    """AMP produced non-finite values."""

    def __init__(self, iteration):
        self.iteration = iteration
        super().__init__(f"AMP diverged at iteration {iteration}")


class WindowUndefinedError(ValueError):
    """A success curve never reaches the upper level of a transition window."""
