"""Exception types raised across the package."""


class GernError(Exception):
    """Base class for all package errors."""


class InvalidIndex(GernError, ValueError):
    """A node index falls outside [0, n)."""


class DisconnectedGraph(GernError, ValueError):
    """Graph is not connected; carries the component count."""

    def __init__(self, components: int, message: str | None = None):
        self.components = components
        super().__init__(message or f"graph is disconnected ({components} components)")


class LengthMismatch(GernError, ValueError):
    """Label array length does not match the node count."""


class StepCapExceeded(GernError, RuntimeError):
    """Random-walk tree generation exceeded its step cap (bug canary)."""


class EdgeSetMismatch(GernError, ValueError):
    """Two edge-frequency tables cover different edge sets."""


class SizeCapExceeded(GernError, ValueError):
    """Graph too large for the dense exact-resistance path."""


class NumericalFailure(GernError, RuntimeError):
    """Eigensolver or other numerical routine failed to converge."""


class MissingEdgeResistance(GernError, ValueError):
    """Resistance table does not cover every edge of the graph."""


class InvalidStart(GernError, ValueError):
    """DFS start node is not a valid node of the tree."""


class ShapeMismatch(GernError, ValueError):
    """Array shapes disagree with the model or graph."""


class NonFiniteActivation(GernError, RuntimeError):
    """A forward pass produced NaN or infinite activations."""


class NonFiniteLoss(GernError, RuntimeError):
    """Training loss became NaN or infinite; carries the offending epoch."""

    def __init__(self, epoch: int, message: str | None = None):
        self.epoch = epoch
        super().__init__(message or f"non-finite loss at epoch {epoch}")


class EmptySubset(GernError, ValueError):
    """Loss or accuracy requested over an empty node subset."""


class InvalidDims(GernError, ValueError):
    """Model layer-size list is invalid."""


class StaleCache(GernError, ValueError):
    """Backward pass called with a cache not produced by a training forward."""


class ClassTooSmall(GernError, ValueError):
    """A class has too few members for the requested split; carries the class."""

    def __init__(self, label: int, have: int, want: int):
        self.label = label
        super().__init__(f"class {label} has {have} nodes, need {want}")


class MissingFile(GernError, FileNotFoundError):
    """A required bundle file is absent."""


class ParseError(GernError, ValueError):
    """A bundle file failed to parse; carries file and line number."""

    def __init__(self, path, line: int, message: str):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class CouldNotConnect(GernError, RuntimeError):
    """Synthetic graph generator failed to produce a connected graph."""
