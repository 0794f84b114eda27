from typing import Optional


class CasimechError(Exception):
    """
    Base class for every error raised by the cavity/wall simulation

    Each error names the offending input field so the command line can
    report it and map it onto a process exit code.
    """

    exit_code = 1

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field

    def __str__(self) -> str:
        message = super().__str__()
        if self.field:
            return f"{self.field}: {message}"
        return message


class ConfigError(CasimechError, ValueError):
    """Malformed or incomplete run configuration (exit 1)"""

    exit_code = 1


class PhysicsValidationError(CasimechError, ValueError):
    """Physically invalid parameters or a formula used outside its preconditions (exit 2)"""

    exit_code = 2


class NumericalError(CasimechError, RuntimeError):
    """Quadrature or integrator failure (exit 3)"""

    exit_code = 3
