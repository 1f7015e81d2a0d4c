class DermforgeError(Exception):
    """Base class for all errors raised by dermforge."""


class ShapeError(DermforgeError, ValueError):
    """Tensor shapes are incompatible with the requested operation."""


class ArgumentError(DermforgeError, ValueError):
    """An argument is outside the operation's contract."""


class StateError(DermforgeError, RuntimeError):
    """An object was used in a state that does not allow the operation."""


class NonFiniteError(DermforgeError, FloatingPointError):
    """A NaN or infinite value appeared where only finite values are allowed."""


class MetadataParseError(DermforgeError, ValueError):
    """A metadata row could not be parsed."""

    def __init__(self, path: str, line: int, reason: str):
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line


class ImageDecodeError(DermforgeError, OSError):
    """An image file could not be decoded."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"Cannot decode image '{path}': {reason}")
        self.path = path
        self.reason = reason


class CheckpointError(DermforgeError):
    """A checkpoint is malformed or incompatible with this build."""


class CheckpointVersionError(CheckpointError):
    """The checkpoint was written by a newer format version."""


class CheckpointTruncatedError(CheckpointError, OSError):
    """The checkpoint file ended before all declared records were read."""
