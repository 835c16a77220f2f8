"""Exception hierarchy shared across the package.

Each class maps to one CLI exit code (see cli.EXIT_CODES).
"""


class TexSplatError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(TexSplatError):
    """A value violates an operation precondition (bad quaternion, zero-size image, ...)."""


class InvalidConfigurationError(TexSplatError):
    """A configuration value is out of range or unknown."""


class ContractViolationError(TexSplatError):
    """Internal usage error, e.g. backward called without forward intermediates."""


class SceneFormatError(TexSplatError):
    """Scene file has a bad magic/version or is truncated."""


class DatasetError(TexSplatError):
    """Base class for dataset loading problems."""


class MissingManifestError(DatasetError):
    pass


class EmptyDatasetError(DatasetError):
    pass


class DimensionMismatchError(DatasetError):
    pass


class UnreadableImageError(DatasetError):
    pass


class MaskError(TexSplatError):
    """Mask file missing, non-binary, or mismatched with its view."""


class TrainingDivergedError(TexSplatError):
    """Loss became non-finite; carries diagnostics in the message."""


class BusyError(TexSplatError):
    """Scene is locked by an exclusive job."""
