"""Exception types shared across the package.

Every error raised by the public API is one of these, so callers (and the
command line driver) can map failures to a category without string matching.
"""


class DplqrError(Exception):
    """Base class for all package errors."""


class ConfigError(DplqrError):
    """Invalid hyperparameters, grids, or option combinations."""


class DataError(DplqrError):
    """Malformed input data: bad shapes, missing cells, unknown columns."""


class TrainingError(DplqrError):
    """Optimization failed: non-finite losses or gradients, or too many
    failed replicates in an experiment."""


class SingularMatrixError(DplqrError):
    """A matrix that must be positive definite is not."""
