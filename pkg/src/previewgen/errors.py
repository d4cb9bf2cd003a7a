"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class PreviewError(Exception):
    """Base class for every error raised by previewgen."""


class GraphValidationError(PreviewError, ValueError):
    pass


class GraphParseError(GraphValidationError):
    def __init__(self, message: str, line: int) -> None:
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.reason = message


class UnknownIdError(PreviewError, KeyError):
    def __str__(self) -> str:  # KeyError quotes its argument otherwise
        return str(self.args[0]) if self.args else ""


class ConvergenceError(PreviewError, ArithmeticError):
    def __init__(self, iterations: int, residual: float) -> None:
        super().__init__(f"no convergence after {iterations} iterations (residual {residual:.3e})")
        self.iterations = iterations
        self.residual = residual


class InfeasibleError(PreviewError, ValueError):
    """No preview satisfies the requested constraints."""


class SolverTimeout(PreviewError, TimeoutError):
    def __init__(self, examined: int, total: int, elapsed: float) -> None:
        super().__init__(f"time limit hit after {examined}/{total} subsets ({elapsed:.1f}s)")
        self.examined = examined
        self.total = total
        self.elapsed = elapsed
