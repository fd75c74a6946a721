"""Exception hierarchy shared by the library and the CLI exit-code mapping."""


class PreconditionError(ValueError):
    """Input does not satisfy the hypotheses of the requested computation."""

    def __init__(self, message, clause=None, witness=None):
        super().__init__(message)
        self.clause = clause
        self.witness = witness


class AssumptionError(PreconditionError):
    """A named hypothesis (class number one, unit congruence, ...) fails."""


class ConsistencyError(RuntimeError):
    """An internal invariant or oracle cross-check failed. Always a bug."""
