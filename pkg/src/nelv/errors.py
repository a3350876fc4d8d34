"""Exception hierarchy shared across the planner."""

from __future__ import annotations


class NelvError(Exception):
    """Base class for all planner errors."""


class InvalidInputError(NelvError, ValueError):
    """A caller-supplied value is outside its documented domain."""


class FormatError(NelvError):
    """A data file does not conform to its documented format."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        loc = ""
        if path is not None:
            loc = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(loc + message)
        self.path = path
        self.line = line


class CoverageError(NelvError):
    """A queried point lies outside the loaded weather grid."""


class ResolutionError(NelvError):
    """A textual reference could not be matched to catalog data."""

    def __init__(self, reference: str, suggestions: list[str] | None = None):
        self.reference = reference
        self.suggestions = suggestions or []
        hint = f" (closest: {', '.join(self.suggestions)})" if self.suggestions else ""
        super().__init__(f"could not resolve reference {reference!r}{hint}")


class InfeasibleRouteError(NelvError):
    """No route exists, not even the direct fallback."""

    def __init__(self, message: str, binding_constraint: str | None = None):
        super().__init__(message)
        self.binding_constraint = binding_constraint


class PricingError(NelvError):
    """A fuel cost was requested at a node that carries no fuel price."""


class IntegrityError(NelvError):
    """Artifacts that must agree (e.g. segment endpoints vs route nodes) do not."""


class NoAirportError(NelvError):
    """No catalog airport lies within the search radius of a point."""


class ExportError(NelvError):
    """A trajectory or overlay cannot be serialized."""


class SessionNotFoundError(NelvError):
    """Unknown session id."""


class SessionFrozenError(NelvError):
    """The session was uploaded and no longer accepts changes."""


class StageOrderError(NelvError):
    """A pipeline stage was requested before its prerequisite completed."""

    def __init__(self, requested: str, missing: str):
        super().__init__(f"stage {requested!r} requires {missing!r} to complete first")
        self.requested = requested
        self.missing = missing
