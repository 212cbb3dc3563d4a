"""Exception types shared across the package."""


class SchemaError(ValueError):
    """Input data does not match the declared column schema."""


class ParameterError(ValueError):
    """An algorithm parameter is out of its valid range for the given data."""


class UndefinedIndexError(ValueError):
    """A validity index is undefined for the given labeling (e.g. a single cluster)."""


class SweepFailureError(RuntimeError):
    """A parameter sweep produced no usable candidate labeling."""
