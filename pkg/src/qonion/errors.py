"""Exception types shared across the package."""


class QOnionError(Exception):
    """Base class for all package errors."""


class InvalidFormError(QOnionError, ValueError):
    """A quadratic form violates its invariants (non-positive-definite, wrong discriminant...)."""


class ResourceLimitError(QOnionError, RuntimeError):
    """An operation exceeds a configured desk-scale guard (qubits, |discriminant|...)."""


class FixtureError(QOnionError, ValueError):
    """An action-table fixture file is malformed or violates its invariants."""


class ConfigError(QOnionError, ValueError):
    """A run configuration or attack plan fails validation; message carries the field path."""
