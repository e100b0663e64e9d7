"""Exception types shared across the package."""


class ValidationError(ValueError):
    """A configuration value or argument failed validation."""


class StatisticalRefusal(RuntimeError):
    """A statistic was requested that censoring or sample size makes unsound."""


class RefinementError(RuntimeError):
    """A numerical refinement check failed to converge.

    Carries the achieved error so callers can report it.
    """

    def __init__(self, message, achieved_error):
        super().__init__(f"{message} (achieved error {achieved_error:.3e})")
        self.achieved_error = achieved_error
