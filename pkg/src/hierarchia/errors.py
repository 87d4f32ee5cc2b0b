class HierarchiaError(Exception):
    """Base class for library errors."""


class DomainError(HierarchiaError, ValueError):
    """Arguments outside an operation's domain (bad labels, shapes, sizes)."""


class CapacityError(HierarchiaError):
    """Request exceeds the supported dense-matrix envelope."""


class DegenerateStateError(HierarchiaError, ZeroDivisionError):
    """A state sequence with vanishing normalization factor."""


class DivergenceError(HierarchiaError, FloatingPointError):
    """An integrator blew up."""


class ConfigError(HierarchiaError):
    """Invalid experiment configuration; ``path`` names the offending field."""

    def __init__(self, message: str, path: str = "", line: int | None = None):
        self.path = path
        self.line = line
        where = path or "<document>"
        if line is not None:
            where += f" (line {line})"
        super().__init__(f"{where}: {message}")
