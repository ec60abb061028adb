"""Exception types shared across the package."""


class QEmbezzleError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(QEmbezzleError):
    """Dimension or bipartite-split mismatch between operands."""


class DomainError(QEmbezzleError):
    """Scalar parameter outside its admissible range."""


class NotPSD(QEmbezzleError):
    """Matrix expected to be positive semidefinite has a significant negative eigenvalue."""


class SupportError(QEmbezzleError):
    """Support containment violated; the requested divergence is infinite."""


class CapacityExceeded(QEmbezzleError):
    """Requested dense object is larger than the configured dimension cap."""


class SamplerStalled(QEmbezzleError):
    """Rejection sampler exceeded its retry budget."""


class FixtureCorrupt(QEmbezzleError):
    """Bundled fixture data failed its integrity or conditioning checks."""


class ConfigError(QEmbezzleError):
    """Invalid experiment configuration; carries the offending field path."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
