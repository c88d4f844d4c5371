"""Exception types shared across the package."""


class RotavgError(Exception):
    """Base class for errors raised by this package."""


class GraphError(RotavgError):
    """Structural problem in a view graph."""


class InvalidNodeError(GraphError):
    """Node id out of range."""


class InvalidEdgeError(GraphError):
    """Edge endpoints invalid (e.g. a self loop)."""


class DuplicateEdgeError(GraphError):
    """The same unordered node pair appears twice."""


class MissingEdgeError(GraphError, KeyError):
    """Queried node pair is not connected."""


class ParseError(RotavgError):
    """Malformed line in a graph or label file; message carries the line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvalidConfigError(RotavgError, ValueError):
    """Configuration value outside its documented domain."""


class NoOverlapError(RotavgError):
    """No common nodes between estimate and reference rotation sets."""


class NumericalError(RotavgError):
    """A numerical routine failed to produce a usable result."""


class ComponentExhausted(RotavgError):
    """No family-to-candidate edge remains although nodes are unsolved.

    Cannot happen for a connected component once every correspondence tier is
    open; raised defensively instead of looping forever.
    """
