"""Exception types shared across the package."""


class DataError(ValueError):
    """The input data cannot be audited.

    Raised for parse failures, length mismatches, non-finite values and
    degenerate samples (e.g. a constant pooled sample, too few groups).
    """


class ConfigError(ValueError):
    """An option value is outside the supported set (e.g. untabulated alpha)."""
