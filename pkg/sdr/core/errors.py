"""
Structured Errors
Every failure raised by the library carries a detail message, an exit code and context
"""

from typing import Any, Dict


class SdrError(Exception):
    """Base error; `exit_code` is what the CLI returns when it surfaces this error"""

    exit_code = 1

    def __init__(self, detail: str, **context: Any):
        super().__init__(detail)
        self.detail = detail
        self.context: Dict[str, Any] = context

    def to_dict(self) -> Dict[str, Any]:
        return {"error": type(self).__name__, "detail": self.detail, **self.context}

    def __str__(self) -> str:
        if not self.context:
            return self.detail
        extras = ", ".join(f"{key}={value}" for key, value in self.context.items())
        return f"{self.detail} ({extras})"


class DimensionMismatchError(SdrError):
    exit_code = 2


class IndexRangeError(SdrError):
    exit_code = 2


class InvalidParameterError(SdrError):
    exit_code = 2


class OutOfHorizonError(SdrError):
    exit_code = 2


class ConfigError(SdrError):
    exit_code = 3

    def __init__(self, detail: str, field: str, **context: Any):
        super().__init__(detail, field=field, **context)
        self.field = field


class ConvergenceError(SdrError):
    exit_code = 4

    def __init__(self, detail: str, iterations: int, residual: float, **context: Any):
        super().__init__(detail, iterations=iterations, residual=residual, **context)
        self.iterations = iterations
        self.residual = residual


class DivergenceError(SdrError):
    exit_code = 5

    def __init__(self, detail: str, iteration: int, **context: Any):
        super().__init__(detail, iteration=iteration, **context)
        self.iteration = iteration
