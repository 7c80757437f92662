from typing import Optional, Sequence


class CoclusterError(Exception):
    """
    Base class for every error raised by the toolkit.
    """


class InputError(CoclusterError, ValueError):
    """
    Invalid shapes, non-finite values or out-of-range configuration.
    """


class ParseError(InputError):
    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateKernelError(CoclusterError):
    """
    A Gibbs kernel row or column underflowed to zero, or a kernel bandwidth is zero.
    """


class CoverageError(CoclusterError):
    def __init__(self, message: str, missing: Sequence[int] = ()):
        self.missing = list(missing)
        super().__init__(message)


class ConvergenceError(CoclusterError):
    """
    Raised when no CCOT sample produced a converged coupling.
    """
