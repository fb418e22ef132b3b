"""Exception hierarchy with stable error codes and process exit codes.

Every error carries a short ``code`` string (used in CLI reports) and the
exit code its category maps to: 2 for input problems, 3 for configuration,
4 for pipeline-stage failures, 5 for provider failures.
"""


class RefineError(Exception):
    """Base class for all errors raised by this package."""

    code = "Error"
    exit_code = 1


class InputError(RefineError):
    """Invalid input data (files, arrays, shapes)."""

    exit_code = 2


class ConfigError(RefineError):
    """Invalid configuration or parameters."""

    exit_code = 3


class StageError(RefineError):
    """A pipeline stage cannot proceed on otherwise valid inputs."""

    exit_code = 4


class ProviderError(RefineError):
    """An external segmentation or candidate provider failed."""

    code = "Provider"
    exit_code = 5


class NotNormalizedError(InputError):
    code = "NotNormalized"


class OutOfRangeError(InputError):
    code = "OutOfRange"


class BadRankError(InputError):
    code = "BadRank"


class ShapeMismatchError(InputError):
    code = "ShapeMismatch"


class IoError(InputError):
    code = "IoError"


class BadHeaderError(InputError):
    code = "BadHeader"


class DtypeMismatchError(InputError):
    code = "DtypeMismatch"


class BadConfigError(ConfigError):
    code = "BadConfig"


class BadParamsError(ConfigError):
    code = "BadParams"


class BadSpecError(ConfigError):
    code = "BadSpec"


class AlphaNotGreaterThanOneError(ConfigError):
    """Inverse-Gamma shape must exceed 1 for the variance to exist."""

    code = "AlphaNotGreaterThanOne"


class EmptyConditionEdgesError(StageError):
    """The condition label map has no edges; consistency is undefined."""

    code = "EmptyConditionEdges"


class NoForegroundError(StageError):
    """A label volume is all background where foreground is required."""

    code = "NoForeground"


class EmptySurfaceError(StageError):
    """A surface distance was requested for an empty mask."""

    code = "EmptySurface"
