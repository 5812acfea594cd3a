"""Exception hierarchy shared by every flexsat module."""


class FlexsatError(Exception):
    """Base class for all library errors."""


class InvalidStateError(FlexsatError, ValueError):
    """A state vector violates its invariants (non-unit quaternion, NaN, bad shape)."""


class ConfigurationError(FlexsatError, ValueError):
    """Parameters or a constructed basis violate a documented invariant."""


class RangeError(FlexsatError, ValueError):
    """An evaluation point lies outside the beam domain [0, ell]."""


class DivergenceError(FlexsatError, ArithmeticError):
    """Time integration produced a non-finite state."""

    def __init__(self, step, t, message=None):
        self.step = step
        self.t = t
        super().__init__(message or f"non-finite state at step {step} (t = {t:.6g} s)")


class ScenarioError(FlexsatError, ValueError):
    """Scenario text could not be parsed or validated.

    ``line`` is the 1-based line number when the problem is tied to one line,
    ``key`` the dotted key name when it is tied to a setting.
    """

    def __init__(self, message, line=None, key=None):
        self.line = line
        self.key = key
        prefix = []
        if line is not None:
            prefix.append(f"line {line}")
        if key is not None:
            prefix.append(f"`{key}`")
        text = f"{', '.join(prefix)}: {message}" if prefix else message
        super().__init__(text)
