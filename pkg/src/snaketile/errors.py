class InstanceError(ValueError):
    """Malformed input: unknown letter, mismatched groups, bad tileset."""


class UnsupportedCapability(TypeError):
    pass


class BudgetExceeded(RuntimeError):
    """A resource bound ran out before the computation closed."""

    def __init__(self, message, **info):
        super().__init__(message)
        self.info = info


class Undetermined(RuntimeError):
    """A check could not be settled within the verification window."""
