"""Exception types shared across the package."""


class CurveError(ValueError):
    """Invalid or degenerate curve data."""


class UnderResolvedError(CurveError):
    """A vertex turns by half a revolution or more, so the tangent angle cannot be unwrapped."""


class CFLViolation(ValueError):
    """Explicit step larger than the stability bound."""


class SpacingCollapse(RuntimeError):
    """Vertex spacing fell below the abort threshold during a run."""

    def __init__(self, message, trajectory=None, time=None):
        super().__init__(message)
        self.trajectory = trajectory
        self.time = time


class NotCalibratedError(ValueError):
    """The constant b does not dominate 1 - cos(theta) on the cylinder."""


class DomainError(ValueError):
    """Cylinder does not fit inside the trajectory (space or time)."""


class ConfigError(ValueError):
    """Bad or unknown configuration key."""
