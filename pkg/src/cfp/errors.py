"""Exception hierarchy."""


class CFPError(Exception):
    """Base class for all errors raised by the package."""


class DimensionMismatch(CFPError, ValueError):
    pass


class InvalidParams(CFPError, ValueError):
    pass


class NotStronglyConnected(CFPError):
    pass


class NotConnected(CFPError):
    """The graph has no directed spanning tree."""


class NumericalFailure(CFPError):
    pass


class NonFinite(CFPError, FloatingPointError):
    """State became NaN/Inf or exceeded the divergence bound."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class ScheduleViolation(CFPError, ValueError):
    pass


class StepSizeViolation(CFPError, ValueError):
    pass


class WrongInequalityKind(CFPError, TypeError):
    pass


class AssertionFailure(CFPError, AssertionError):
    """A runtime property check failed during a run."""

    def __init__(self, name, step, lhs, rhs):
        super().__init__(f"{name} violated at step {step}: {lhs!r} > {rhs!r}")
        self.name = name
        self.step = step
        self.lhs = lhs
        self.rhs = rhs


class ScenarioError(CFPError, ValueError):
    """Malformed scenario file; ``path`` locates the offending field."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
