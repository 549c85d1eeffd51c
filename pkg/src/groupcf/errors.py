"""Exception types shared across the package."""


class GroupCfError(Exception):
    """Base class for errors raised by this package."""


class DataError(GroupCfError):
    """Malformed or unusable input data (missing file, column or value)."""


class NothingToExplainError(GroupCfError):
    """The classifier predicts retention for every row; there is nothing to explain."""


class SolverError(GroupCfError):
    """The numerical solver failed; the message carries the problem dimensions."""


class AuditError(GroupCfError):
    """A stored report disagrees with independently recomputed metrics."""
