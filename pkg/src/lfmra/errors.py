"""Exception types shared across the package."""


class LfmraError(Exception):
    """Base class for all library errors."""


class ParameterError(LfmraError):
    """Invalid or mismatched parameters."""


class WindowOverflowError(LfmraError):
    """An index shift left the allowed digit window."""


class ConstraintViolation(LfmraError):
    """A table violates a structural constraint such as a row-sum condition.

    ``details`` holds (witness, info) pairs describing each offense.
    """

    def __init__(self, message, details=None):
        super().__init__(message)
        self.details = list(details) if details else []


class StructureError(LfmraError):
    """Malformed tree or graph input."""


class NoSolutionError(LfmraError):
    """Search space exhausted without finding a solution."""


class NonConvergenceError(LfmraError):
    """Fixed point not reached within the iteration bound.

    Carries the computed trajectory in ``states`` for diagnostics.
    """

    def __init__(self, message, states=None):
        super().__init__(message)
        self.states = list(states) if states else []


class InternalConsistencyError(LfmraError):
    """A quantity left its mathematically guaranteed range; indicates a bug."""
