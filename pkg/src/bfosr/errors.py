"""Exception types shared across the package."""


class BfosrError(Exception):
    """Base class for all package errors."""


class InvalidDimensionError(BfosrError, ValueError):
    """A size argument (basis count, matrix shape) is out of its allowed range."""


class InvalidRangeError(BfosrError, ValueError):
    """A numeric argument lies outside its allowed interval."""


class OutOfDomainError(BfosrError, ValueError):
    """A time point falls outside the basis knot domain."""


class MisalignedGridError(BfosrError, ValueError):
    """Times do not align to the uniform grid required by a discrete covariance mode."""


class SingularDesignError(BfosrError, ValueError):
    """A least-squares design matrix is rank deficient."""


class IngestionError(BfosrError, ValueError):
    """A data file violates the input contract."""


class ConfigError(BfosrError, ValueError):
    """A run configuration file or override is malformed or inconsistent."""


class InitializationError(BfosrError, RuntimeError):
    """The sampler could not start from a finite joint density."""
