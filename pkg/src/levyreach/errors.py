"""Exception types shared across the package."""


class LevyReachError(Exception):
    """Base class for all package errors."""


class QuadratureError(LevyReachError):
    """An adaptive integral failed to reach the requested accuracy."""


class EmptyRegionError(LevyReachError):
    """Sampling was requested from a region of zero intensity mass."""


class InfiniteMassError(LevyReachError):
    """The intensity mass of a region is infinite (cutoff too small)."""


class DivergenceError(LevyReachError):
    """A simulated state left the finite range.

    Attributes
    ----------
    time : float
        Time at which the guard fired.
    """

    def __init__(self, time, message=None):
        self.time = float(time)
        super().__init__(message or f"state diverged at t={self.time:.6g}")


class SingularCoefficientError(LevyReachError):
    """A jump matrix that must be inverted is singular."""


class ConditionIViolation(LevyReachError):
    """The frame condition failed at a visited state."""

    def __init__(self, state, alignment, kappa):
        self.state = state
        self.alignment = float(alignment)
        self.kappa = float(kappa)
        super().__init__(
            f"frame condition violated at state {list(map(float, state))}: "
            f"best alignment {self.alignment:.6g} < kappa {self.kappa:.6g}"
        )


class ConfigError(LevyReachError):
    """Invalid experiment or measure configuration."""

    def __init__(self, message, field=None, line=None):
        self.field = field
        self.line = line
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
