"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """A function argument is outside its admissible range (NaN, wrong size, ...)."""


class ConfigurationError(ValueError):
    """A run configuration violates a resolution rule or is missing a field."""


class SolverError(RuntimeError):
    """An inner linear solve broke down."""


class UnsupportedConfigurationError(ValueError):
    """A requested (p, q) combination has no exact oracle."""
