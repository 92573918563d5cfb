"""Exception types shared across the package."""


class NumericError(RuntimeError):
    """An iterative routine failed to reach its convergence target.

    Carries the best achieved residual (and iteration count when known) so
    callers can report or retry with a different configuration.
    """

    def __init__(self, message, residual=None, iterations=None):
        if residual is not None:
            message = "%s (residual=%.3e)" % (message, residual)
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class NonUniqueReconstructionError(NumericError):
    """The sampled rows of the basis are rank deficient, so more than one
    bandlimited signal matches the observed samples."""


class GraphParseError(ValueError):
    """A graph or matrix file is malformed; `line` is 1-based."""

    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


class ConfigurationError(ValueError):
    """An experiment configuration is invalid or internally inconsistent."""
