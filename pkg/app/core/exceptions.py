"""Domain exceptions shared by the service, repository and interface layers."""


class SigmaEvolutionError(Exception):
    """Base class for every error raised on purpose by this package."""


class InvalidParametersError(SigmaEvolutionError, ValueError):
    """A parameter tuple or grid violates its stated invariants."""


class MissingColumnError(SigmaEvolutionError, KeyError):
    """A norm series lacks a column that an analysis needs."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "missing column"


class FitError(SigmaEvolutionError, ValueError):
    """A rate fit was asked for on a window that cannot support it."""


class RunDirectoryError(SigmaEvolutionError, OSError):
    """A run directory cannot be created, written or read."""


class BlowUpDetected(SigmaEvolutionError):
    """A time step produced non-finite values.

    Raised by single steps only; the run drivers catch it and flag the series.
    """

    def __init__(self, t: float, message: str = "non-finite field values") -> None:
        super().__init__(f"{message} at t={t:g}")
        self.t = t
