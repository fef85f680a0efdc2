"""Exception types shared across the package."""


class SurvmatchError(Exception):
    """Base class for all survmatch errors."""

    category = "runtime"


class SchemaError(SurvmatchError):
    """Dataset schema is inconsistent or does not match the file."""

    category = "schema"


class DataError(SurvmatchError):
    """A data value violates its domain (bad indicator, negative time, ...)."""

    category = "data"


class ShapeError(SurvmatchError):
    """Array operands are shape-incompatible for the requested operation."""

    category = "shape"


class ConfigError(SurvmatchError):
    """Run configuration file is missing, malformed, or inconsistent."""

    category = "config"


class TrainingDiverged(SurvmatchError):
    """Optimization produced a non-finite loss."""

    category = "training"
