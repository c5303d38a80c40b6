"""Exception types shared across the toolkit."""


class PiezoresError(Exception):
    """Base class for all toolkit-specific errors."""


class InvariantError(PiezoresError):
    """A value object violates one of its structural invariants."""


class ConfigError(PiezoresError):
    """An option, override or run configuration is out of range or inconsistent."""


class EmptyScanRangeError(PiezoresError):
    """A requested angle scan covers no angles (theta_min >= theta_max)."""


class DegenerateStackError(InvariantError):
    """A layer stack does not contain exactly one electrically active layer."""


class ResonanceNotFoundError(PiezoresError):
    """An impedance sweep has no series-minimum / parallel-maximum pair."""


class NoResonanceError(PiezoresError):
    """Fit input shows conductance structure but no usable resonance peak."""


class FitConvergenceError(PiezoresError):
    """The circuit-fit refinement stopped before reaching its tolerance."""


class SweepCoverageError(PiezoresError):
    """A sweep does not cover the frequency band an operation needs."""


class ReflectionMagnitudeError(PiezoresError):
    """Reflection coefficient magnitude at or above one (non-passive data)."""


class BranchCountError(PiezoresError):
    """An operation requires a circuit model with a specific branch count."""


class DuplicateSpurError(PiezoresError):
    """A requested spur frequency collides with an existing branch."""


class InfeasibleTimingError(PiezoresError):
    """A periodic steady state exists only with a negative stage duration."""


class PssConvergenceError(PiezoresError):
    """The periodic-steady-state shooting iteration did not converge."""


class ParseError(PiezoresError):
    """A data file could not be parsed; carries row context when known."""

    def __init__(self, message: str, row: int | None = None):
        if row is not None:
            message = f"{message} (row {row})"
        super().__init__(message)
        self.row = row
