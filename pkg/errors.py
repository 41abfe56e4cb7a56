"""
Errors
======
Exception hierarchy shared by every engine. Each class carries the
process exit code the CLI maps it to.
"""


class SyzygyError(Exception):
    exit_code: int = 1


class ConfigError(SyzygyError):
    """Invalid setting, job configuration or monomial text."""
    exit_code = 2


class HypothesisViolation(SyzygyError):
    """A construction or theorem was invoked outside its hypotheses."""
    exit_code = 2


class SizeLimitExceeded(SyzygyError):
    exit_code = 3

    def __init__(self, columns: int, limit: int, what: str = "strand"):
        self.columns = columns
        self.limit = limit
        super().__init__(f"{what} needs {columns} columns, limit is {limit}")


class NotInSubring(SyzygyError):
    """Exponents are not multiples of d, so the d-th root is undefined."""


class NotHomogeneous(SyzygyError):
    pass


class NotModularHomogeneous(SyzygyError):
    pass


class OutOfRange(SyzygyError):
    """Index arguments outside the variables of the active setting."""
    exit_code = 2


class RangeEmpty(SyzygyError):
    exit_code = 2
