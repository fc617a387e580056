"""Exception and warning types shared across the package."""


class GraphFilterError(Exception):
    """Base class for all armagf errors."""


class InputError(GraphFilterError):
    """Invalid user input: malformed file, bad config, dimension mismatch."""


class DesignError(GraphFilterError):
    """A filter-design stage failed (singular system, degenerate factorization)."""

    def __init__(self, stage: str, message: str):
        super().__init__(f"{stage}: {message}")
        self.stage = stage


class StabilityError(GraphFilterError):
    """A filter violates its stability constraint and was refused."""


class ConvergenceError(GraphFilterError):
    """An iterative measurement did not converge to the requested accuracy."""


class SpectralIntervalWarning(UserWarning):
    """The declared spectral interval does not contain the actual spectrum."""
