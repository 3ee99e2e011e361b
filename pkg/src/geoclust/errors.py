"""Exception types shared across the toolkit.

Both inherit from ValueError so library callers can catch broadly; the CLI
maps them to distinct exit codes (data errors vs. algorithm preconditions).
"""


class DataError(ValueError):
    """Raised when an input file or dataset is missing, malformed, or unusable."""


class PreconditionError(ValueError):
    """Raised when an operation is called with arguments that violate its contract."""
