"""Exception hierarchy shared across the panelfit package."""

from __future__ import annotations


class PanelfitError(Exception):
    """Base class for all errors raised by this package."""


class LoadError(PanelfitError):
    """An input file is malformed, truncated, or inconsistent."""


class ConfigError(PanelfitError):
    """A configuration artifact (alias rules, flags) is invalid."""


class ValidationError(PanelfitError):
    """An operation was invoked with arguments violating its contract."""


class EmptyProfileError(ValidationError):
    """An entity ends up with zero usable publications."""

    def __init__(self, entity_id: str, detail: str = ""):
        self.entity_id = entity_id
        msg = f"entity {entity_id!r} has an empty publication profile"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class MissingCoordinateError(ValidationError):
    """A profile references a journal with no map coordinates."""

    def __init__(self, journal_id: int, title: str | None = None):
        self.journal_id = journal_id
        self.title = title
        name = f"{title!r} (id {journal_id})" if title else f"id {journal_id}"
        super().__init__(f"journal {name} has no map coordinates")


class LayoutMismatchError(ValidationError):
    """Two barycenters from different layout runs were compared."""


class MatrixMismatchError(ValidationError):
    """Two profile vectors from different similarity matrices were compared."""
