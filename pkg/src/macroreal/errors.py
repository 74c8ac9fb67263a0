"""Exception types shared by the numerical modules and the CLI."""


class InvalidArgumentError(ValueError):
    """An input violates a documented precondition."""


class NonConvergenceError(RuntimeError):
    """A truncation or discretisation is too coarse for the requested accuracy.

    ``diagnostics`` carries the numbers that triggered the failure (tail
    masses, completeness deficits, normalisation deficits) so callers can
    report them.
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics
