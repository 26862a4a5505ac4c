"""Exception hierarchy shared by all pufkit modules."""

from typing import Optional, Tuple


class PufkitError(Exception):
    """Base class for all pufkit errors."""


class ParameterError(PufkitError, ValueError):
    """An argument is outside its documented domain."""


class ConfigError(PufkitError, ValueError):
    """Configuration file or override is invalid."""


class ConditionLookupError(PufkitError, KeyError):
    """A condition label is not present in a dataset."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown condition"


class FormatError(PufkitError):
    """An on-disk artefact (dataset, record, helper file) is malformed."""


class ProtocolError(PufkitError):
    """Helper data received by the server is structurally invalid."""


class PlanningError(PufkitError):
    """No catalog code meets the requested key failure rate."""

    def __init__(
        self,
        message: str,
        best_p_fail: Optional[float] = None,
        best_code: Optional[Tuple[int, int, int]] = None,
    ):
        super().__init__(message)
        self.best_p_fail = best_p_fail
        self.best_code = best_code
