"""Exception hierarchy shared by every lab module."""

from typing import Any, Dict, Optional


class NelsonLabError(Exception):
    """Base class for all lab errors."""

    def to_record(self) -> Dict[str, Any]:
        """Machine-readable error record written next to a failed run."""
        return {
            "type": type(self).__name__,
            "message": str(self),
            "path": getattr(self, "path", None),
            "diagnostics": getattr(self, "diagnostics", None),
        }


class ConfigurationError(NelsonLabError):
    """Raised when an operation is asked to run in an unsupported setup."""


class ParseError(ConfigurationError):
    """Raised when a scenario document fails validation."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class NumericalError(NelsonLabError):
    """Raised when an iterative method fails to converge."""

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class CFLViolation(NumericalError):
    """Raised when an explicit step would exceed the Courant limit."""

    def __init__(self, courant: float, suggested_dt: float):
        self.suggested_dt = suggested_dt
        super().__init__(
            f"Courant number {courant:.3f} exceeds 0.5; retry with dt <= {suggested_dt:.3e}",
            {"courant": courant, "suggested_dt": suggested_dt},
        )


class OutOfDomainError(NelsonLabError):
    """Raised when a point leaves a non-periodic grid extent."""


class ResolutionError(NelsonLabError):
    """Raised when a loop or core is too coarse for the grid."""


class DegenerateInputError(NelsonLabError):
    """Raised when an input state has vanishing norm."""
