"""Exception hierarchy shared across the toolkit."""


class PrismError(Exception):
    """Any error raised while processing a model description."""


class PrismSyntaxError(PrismError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


class PrismNameError(PrismError):
    """Undeclared identifier, duplicate variable, unknown label, ..."""


class PrismTypeError(PrismError):
    """Strict type checking failure (bool/numeric mix, int/real misuse)."""


class UnresolvedConstantError(PrismError):
    def __init__(self, names):
        self.names = sorted(names)
        super().__init__(
            "unresolved constants: " + ", ".join(self.names)
            + " (supply values via constant overrides)"
        )


class EvalError(PrismError):
    """Runtime expression failure: division by zero, mod by zero, bad pow."""


class ModelError(Exception):
    """Semantic failure while exploring or simulating a model."""


class LimitExceeded(ModelError):
    def __init__(self, states, transitions, limits):
        self.states = states
        self.transitions = transitions
        self.limits = limits
        super().__init__(
            f"exploration limit exceeded: {states} states / {transitions} transitions "
            f"explored (max_states={limits.max_states}, max_transitions={limits.max_transitions})"
        )


class DisabledActionError(ModelError):
    def __init__(self, state, action):
        self.state = tuple(state)
        self.action = action
        super().__init__(f"action {action!r} is disabled in state {self.state}")


class PropertyError(Exception):
    """Property string does not match the supported grammar."""


class CheckError(Exception):
    """Model checking failure: kind mismatch, non-convergence, unknown label."""


class PolicyFormatError(Exception):
    """Policy file is corrupt, has a wrong version, or does not fit the model."""


class TrainingError(Exception):
    """Training aborted (e.g. NaN loss)."""


class TrackerError(Exception):
    """Run-tracker failure: missing run, broken parent link."""
