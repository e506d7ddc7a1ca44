"""
Exception hierarchy for wavelab.

Every failure the library raises on purpose derives from WaveLabError so the
CLI can turn it into a nonzero exit code and an error manifest.
"""

from typing import Optional


class WaveLabError(Exception):
    """Base exception for wavelab errors."""
    pass


class ConfigurationError(WaveLabError):
    """Raised for out-of-range parameters or malformed experiment configs."""

    def __init__(self, message: str, key: Optional[str] = None, line: Optional[int] = None):
        self.key = key
        self.line = line
        prefix = ""
        if key is not None:
            prefix = f"{key}: "
        if line is not None:
            prefix = f"line {line}: {prefix}"
        super().__init__(f"{prefix}{message}")


class ShapeError(WaveLabError):
    """Raised when a field does not match the grid it is used with."""
    pass


class PreconditionError(WaveLabError):
    """Raised when an input violates a documented precondition."""
    pass


class BlowUpError(WaveLabError):
    """Raised when a time stepper produces non-finite values."""

    def __init__(self, step: int, t: float, seed: Optional[str] = None):
        self.step = step
        self.t = t
        self.seed = seed
        message = f"non-finite field at step {step} (t={t:.6g})"
        if seed is not None:
            message += f", trial seed {seed}"
        super().__init__(message)
