"""Exception types raised by entropy-clustering"""

from typing import Optional, Tuple


class EntropyClusteringError(Exception):
    """Base class for all library errors"""


class InputError(EntropyClusteringError):
    """Unreadable or invalid input data, labels, trees or arguments"""


class ConstraintConflictError(EntropyClusteringError):
    """A pair ends up both must-linked and cannot-linked"""

    def __init__(self, message: str, pair: Optional[Tuple[int, int]] = None):
        super().__init__(message)
        self.pair = pair


class OracleLimitError(EntropyClusteringError):
    """Brute-force reference asked to enumerate too many vertices"""
