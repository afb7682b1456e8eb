"""Exception hierarchy shared by the library, the CLI and the HTTP API.

The CLI maps these onto exit codes: ArgumentError -> 2, ResourceError -> 3.
"""


class SegmentationError(Exception):
    """Base class for all segmentkit errors."""


class ArgumentError(SegmentationError, ValueError):
    """An argument is outside the operation's domain."""


class StructuralError(ArgumentError):
    """A signal, grid or partition is malformed (overlapping pieces, unsorted points, ...)."""


class RoutingError(ArgumentError):
    """An input belongs to a different code path, e.g. mu = 0 sent to the smoothing solver."""


class ResourceError(SegmentationError, RuntimeError):
    """A configured size cap was exceeded."""


class TruncationWarning(UserWarning):
    """The cosine series was cut off before its certified error bound dropped below tolerance."""
