"""Exception types shared across the package."""

from __future__ import annotations


class DomainError(ValueError):
    """A parameter or argument lies outside its physically meaningful range."""


class ConfigError(ValueError):
    """A config file could not be parsed or contains invalid entries."""

    def __init__(self, message: str, *, key: str | None = None,
                 line: int | None = None) -> None:
        parts = []
        if line is not None:
            parts.append(f"line {line}")
        if key is not None:
            parts.append(f"key {key!r}")
        if parts:
            message = f"{message} ({', '.join(parts)})"
        super().__init__(message)
        self.key = key
        self.line = line


class QuadratureError(RuntimeError):
    """Numerical integration failed to reach the requested accuracy."""

    def __init__(self, message: str, diagnostics: dict | None = None) -> None:
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class CapabilityError(RuntimeError):
    """The requested computation is outside what this implementation supports."""
