"""
Exception hierarchy for carbon-gmam.
"""
from typing import List, Optional


class CarbonGmamError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CarbonGmamError):
    """Configuration or parameter file could not be parsed or validated."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class DomainError(CarbonGmamError, ValueError):
    """A state or argument lies outside the admissible domain."""


class MetricSingularityError(DomainError):
    """The noise metric is singular (buffer factor below its floor)."""


class DomainExitError(DomainError):
    """A trajectory left the admissible domain during integration."""

    def __init__(self, message: str, time: float = 0.0):
        super().__init__(message)
        self.time = time


class ConvergenceError(CarbonGmamError):
    """An iterative solver did not reach its tolerance."""


class SingularJacobianError(CarbonGmamError):
    """Newton iteration met a singular Jacobian."""


class NoCycleError(CarbonGmamError):
    """No limit cycle of the requested stability exists or could be found."""


class CycleSearchError(NoCycleError):
    """The return-map search ended without deciding whether a cycle exists."""


class DegeneratePathError(CarbonGmamError):
    """A discrete path has (near) zero length."""


class RelaxationError(CarbonGmamError):
    """The semi-implicit path update failed."""


class AllCandidatesFailedError(CarbonGmamError):
    """Every endpoint candidate on the limit cycle failed to solve."""

    def __init__(self, message: str, diagnostics: Optional[List[str]] = None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class OutputError(CarbonGmamError):
    """Writing results failed; carries the files written so far."""

    def __init__(self, message: str, partial_manifest: Optional[dict] = None):
        super().__init__(message)
        self.partial_manifest = partial_manifest or {}
