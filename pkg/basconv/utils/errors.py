class BasConvError(Exception):
    """Base class for every error raised on purpose by this package."""


class ConfigurationError(BasConvError, ValueError):
    pass


class DataIntegrityError(BasConvError, ValueError):
    pass


class EmptyGraphError(BasConvError, ValueError):
    pass


class DimensionError(BasConvError, ValueError):
    pass


class FingerprintMismatchError(BasConvError, ValueError):
    pass


class ArtifactNotFoundError(BasConvError, FileNotFoundError):
    pass


class NonFiniteError(BasConvError, FloatingPointError):
    pass
