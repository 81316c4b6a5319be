"""Exception types shared across modules (mapped to CLI exit codes)."""


class ValidationError(ValueError):
    """Bad input or arguments (exit code 2)."""


class NumericalError(RuntimeError):
    """A quadrature, series or extrapolation failed to meet its tolerance (exit code 3)."""


class DegeneracyError(ValueError):
    """A kernel vanishes identically along a ray where it must not."""


class BranchConflictError(NumericalError):
    """The transformation-law constant disagrees with the Gauss-mean oracle."""

    def __init__(self, message, folded=None, oracle=None):
        super().__init__(message)
        self.folded = folded
        self.oracle = oracle
