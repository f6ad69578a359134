"""Exception types shared across the package."""


class QProbeError(Exception):
    """Base class for package errors."""


class ConfigError(QProbeError, ValueError):
    """Invalid scenario configuration. ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class NumericalPreconditionError(QProbeError, ValueError):
    """An input violates a numerical precondition (Hermiticity, conditioning, grid support)."""
