"""Exception types raised by the library."""


class TargetOutOfWindow(ValueError):
    """A target's delay falls outside the ``L + L~`` sampling window."""


class SolverFailure(RuntimeError):
    """The sparse solver did not converge; ``stats`` carries diagnostics."""

    def __init__(self, msg, stats=None):
        super().__init__(msg)
        self.stats = stats


class NotAchievable(ValueError):
    """No pulse count up to the cap reaches the requested coherence."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""
