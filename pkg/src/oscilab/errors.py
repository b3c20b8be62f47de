"""Error types shared across the package."""


class InvariantViolation(ValueError):
    """A spec or configuration violates one of its declared invariants.

    ``invariant`` is a stable machine-readable slug (e.g. "beta-positivity")
    so callers such as the command-line runner can report which rule failed
    without parsing the human-readable message.
    """

    def __init__(self, invariant, message):
        self.invariant = invariant
        super().__init__(message)
