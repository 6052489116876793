"""Exception hierarchy shared by all solver stages."""

from __future__ import annotations


class QHJError(Exception):
    """Base class for every error raised by :mod:`qhjwave`."""


class DomainError(QHJError, ValueError):
    """A position lies outside the region where an operation is defined."""


class UnsupportedPotentialShape(QHJError):
    """The potential does not have exactly two turning points at this energy."""


class RootFindError(QHJError):
    """A bracketing root search failed to converge."""


class NotAvailable(QHJError):
    """The potential carries no analytic eigen-data."""


class OutsideAllowedRegion(QHJError, ValueError):
    """Classical momentum requested where E < V(x)."""


class BracketError(QHJError):
    """An energy bracket does not straddle a sign change."""


class DegenerateInit(QHJError, ValueError):
    """sin(X0 + phi) vanishes, so the amplitude B is undefined."""


class BranchError(QHJError, ValueError):
    """A non-positive X'(x1) was requested; only the X' > 0 branch is supported."""


class BranchCollapse(QHJError):
    """X' reached zero during integration of the phase equation."""

    def __init__(self, message: str, position: float):
        super().__init__(message)
        self.position = position


class StiffnessError(QHJError):
    """The adaptive integrator could not take a step above its floor."""


class AsymptoticsError(QHJError):
    """A Riccati seed point is not deep enough in the forbidden region."""


class RiccatiBlowup(QHJError):
    """The Riccati variable diverged, which signals a wrong branch or direction."""

    def __init__(self, message: str, position: float):
        super().__init__(message)
        self.position = position


class JoinError(QHJError):
    """The allowed-region representation does not join the decaying tail smoothly."""

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class IncomparableGrids(QHJError):
    """Two tabulated wavefunctions overlap on less than 90% of their span."""


class ConfigError(QHJError, ValueError):
    """A run configuration failed validation; ``problems`` lists every issue."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = list(problems)
