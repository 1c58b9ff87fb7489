"""Exception types shared across the package."""


class FormatError(ValueError):
    """Raised when a binary file does not match its expected layout.

    Carries the byte offset where parsing failed.
    """

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class ConstructionFailure(RuntimeError):
    """Raised when the Las-Vegas net construction exhausts its trial budget.

    Carries the number of trials attempted so callers can fall back.
    """

    def __init__(self, message: str, trials: int):
        super().__init__(message)
        self.trials = trials


class UnsupportedOperation(RuntimeError):
    """Raised when an index configuration cannot support an operation."""
