"""Exception hierarchy for the fdgcl package.

Every error raised by the library derives from :class:`FdgclError`, so
callers (and the CLI) can catch one type and map it to an exit code.
"""


class FdgclError(Exception):
    """Base class for all fdgcl errors."""


class DomainError(FdgclError):
    """An argument lies outside the mathematical domain of an operation."""


class ConvergenceError(FdgclError):
    """A numerical routine could not reach its accuracy target."""


class FormatError(FdgclError):
    """A data file is malformed (carries the offending line number)."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where = f" [{where}]"
        super().__init__(f"{message}{where}")


class ShapeError(FdgclError):
    """Array dimensions are inconsistent."""


class SizeError(FdgclError):
    """A problem exceeds a hard size cap (e.g. the dense eigensolver)."""


class AsymmetryError(FdgclError):
    """A matrix required to be symmetric is not."""


class ZeroVectorError(FdgclError):
    """A nonzero vector was required."""


class ZeroRowError(FdgclError):
    """A row of an embedding matrix is identically zero."""

    def __init__(self, row, which=""):
        self.row = row
        tag = f" in {which}" if which else ""
        super().__init__(f"zero row at index {row}{tag}")


class ConfigError(FdgclError):
    """An invalid configuration value or combination."""


class NonFiniteError(FdgclError):
    """A computation produced NaN or infinity."""


class VariantError(FdgclError):
    """An operation does not support the requested diffusion variant."""


class DegenerateError(FdgclError):
    """Input is degenerate (e.g. constant) for the requested statistic."""


class DegenerateColumnError(DegenerateError):
    """A feature column has zero variance."""

    def __init__(self, columns):
        self.columns = list(columns)
        super().__init__(f"zero-variance column(s): {self.columns}")


class SingletonClassError(FdgclError):
    """A class with fewer than two members cannot yield intra distances."""

    def __init__(self, classes):
        self.classes = list(classes)
        super().__init__(f"class(es) with < 2 members: {self.classes}")


class ConnectivityError(FdgclError):
    """A connected graph could not be generated."""
