"""Exception types shared across the package.

The command line layer maps these onto process exit codes, so solver code
should raise the most specific class that applies.
"""

__all__ = [
    "NskError",
    "ConfigError",
    "NotATwoShockError",
    "VacuumExceededError",
    "InconsistentParamsError",
    "ProfileError",
    "MonotonicityError",
    "OvershootError",
    "TailFitError",
    "TailTruncationError",
    "DegenerateShockError",
    "ShiftConsistencyError",
    "PositivityError",
    "CorridorError",
    "StepFailure",
    "AuditError",
]


class NskError(Exception):
    """Base class for all package errors."""


class ConfigError(NskError):
    """Malformed, unknown, or out-of-range configuration input."""


class NotATwoShockError(NskError):
    """End states do not define a compressive 2-shock (e.g. u_plus >= 0)."""


class VacuumExceededError(NskError):
    """No back state with positive specific volume matches the jump data."""


class InconsistentParamsError(NskError):
    """Jump conditions fail to close between the two end states."""


class ProfileError(NskError):
    """Traveling-wave profile construction failed."""


class MonotonicityError(ProfileError):
    """The connecting orbit lost V' > 0 before reaching the front state."""


class OvershootError(ProfileError):
    """The connecting orbit overshot the front state (spiral approach)."""


class TailFitError(ProfileError):
    """Too few usable samples, or a non-decaying tail, in the rate fit."""


class TailTruncationError(NskError):
    """A field did not decay to its far-field value at the domain edge."""


class DegenerateShockError(NskError):
    """v_plus - v_minus is too small to normalize shift integrals."""


class ShiftConsistencyError(NskError):
    """Closed-form shift and residual quadrature disagree beyond tolerance."""


class PositivityError(NskError):
    """Specific volume left the positive cone."""


class CorridorError(NskError):
    """The state left the trusted corridor around the end states."""


class StepFailure(NskError):
    """Implicit step did not converge.

    Carries the simulation time at which the step was attempted.
    """

    def __init__(self, message: str, t: float):
        super().__init__(f"{message} (t = {t:.6g})")
        self.t = t


class AuditError(NskError):
    """A stored run violates one of the recorded invariants."""
