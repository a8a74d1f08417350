"""Exception types shared across the blink-analysis pipeline."""


class BlinkError(Exception):
    """Base class for all blinklab errors."""


class InvalidInputError(BlinkError, ValueError):
    """Input violates a documented precondition (shape, range, finiteness)."""


class DegenerateGeometryError(InvalidInputError):
    """Eye landmarks collapse, e.g. zero corner-to-corner distance."""


class DegenerateDistributionError(BlinkError, ValueError):
    """A threshold cannot be derived because the values are indistinguishable."""


class MissingColumnError(BlinkError):
    """A requested CSV column is absent from the header."""

    def __init__(self, column: str):
        super().__init__(f"column {column!r} not found in CSV header")
        self.column = column
