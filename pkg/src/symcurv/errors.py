"""Exception types shared across the package."""


class SymcurvError(Exception):
    """Base class for all package errors."""


class DomainError(SymcurvError, ValueError):
    """A precondition on the inputs is violated."""


class SingularityError(SymcurvError, ZeroDivisionError):
    """A denominator required to be nonzero vanishes (within tolerance)."""


class DegenerateInputError(SymcurvError, ValueError):
    """Input fails a nondegeneracy hypothesis (e.g. repeated eigenvalues)."""


class DomainExitError(SymcurvError):
    """A finite-difference probe point left the admissible cone."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class SamplingError(SymcurvError, RuntimeError):
    """Rejection sampling failed to produce points at an acceptable rate."""


class ConeExitError(SymcurvError):
    """Surface curvatures left the operator's admissible cone."""

    def __init__(self, message, nodes=None):
        super().__init__(message)
        self.nodes = nodes or []


class ConvergenceError(SymcurvError, RuntimeError):
    """Iterative solve failed to converge."""

    def __init__(self, message, last_surface=None, diagnostics=None):
        super().__init__(message)
        self.last_surface = last_surface
        self.diagnostics = diagnostics


class ContinuationError(ConvergenceError):
    """Homotopy continuation stalled before reaching the target."""

    def __init__(self, message, last_t=None, path=None, **kw):
        super().__init__(message, **kw)
        self.last_t = last_t
        self.path = path


class ConfigError(SymcurvError, ValueError):
    """Malformed run configuration."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
