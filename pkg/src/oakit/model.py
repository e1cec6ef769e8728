"""Domain types for an OpenAIRE-Graph-style scholarly graph.

Entities are immutable values keyed by their OpenAIRE identifier. Relations
are typed, directed edges whose type name is kept byte-for-byte as found in
the dump (``IsCitedBy`` and ``isAuthorInstitutionOf`` differ in casing and are
matched exactly).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from datetime import date
from typing import Optional, Union

EntityId = str

CITES = "IsCitedBy"
AFFILIATION = "isAuthorInstitutionOf"
PARTICIPATION = "isParticipant"


class ProductKind(enum.Enum):
    """The four research product kinds; together they make up ``results``."""

    PUBLICATION = "publication"
    DATASET = "dataset"
    SOFTWARE = "software"
    OTHER = "otherresearchproduct"


class AccessClass(enum.Enum):
    OPEN = "OPEN"
    EMBARGO = "EMBARGO"
    CLOSED = "CLOSED"
    OTHER = "OTHER"
    MISSING = "MISSING"


_CANONICAL_ACCESS = {
    "OPEN": AccessClass.OPEN,
    "EMBARGO": AccessClass.EMBARGO,
    "CLOSED": AccessClass.CLOSED,
}


def _require_id(value: str, what: str) -> None:
    if not isinstance(value, str) or not value:
        raise ValueError(f"{what} must be a non-empty string, got {value!r}")


@dataclass(frozen=True)
class Pid:
    scheme: str
    value: str

    def __post_init__(self) -> None:
        if not self.value:
            raise ValueError("pid value must be non-empty")
        object.__setattr__(self, "scheme", self.scheme.lower())

    def __str__(self) -> str:
        return f"{self.scheme}:{self.value}"


@dataclass(frozen=True)
class AccessRight:
    """Best access right label, verbatim from the dump (open vocabulary)."""

    label: str

    @property
    def category(self) -> AccessClass:
        return _CANONICAL_ACCESS.get(self.label, AccessClass.OTHER)


@dataclass(frozen=True)
class ResearchProduct:
    id: EntityId
    kind: ProductKind
    pids: tuple[Pid, ...] = ()
    publication_date: Optional[date] = None
    best_access_right: Optional[AccessRight] = None
    title: Optional[str] = None

    def __post_init__(self) -> None:
        _require_id(self.id, "product id")
        object.__setattr__(self, "pids", tuple(self.pids))

    @property
    def canonical_pid(self) -> Optional[Pid]:
        return self.pids[0] if self.pids else None


@dataclass(frozen=True)
class Organization:
    id: EntityId
    legal_name: Optional[str] = None
    legal_short_name: Optional[str] = None
    country_code: Optional[str] = None

    def __post_init__(self) -> None:
        _require_id(self.id, "organization id")
        if self.country_code is not None and not self.country_code:
            raise ValueError("country code, when present, must be non-empty")


@dataclass(frozen=True)
class Project:
    id: EntityId
    name: Optional[str] = None

    def __post_init__(self) -> None:
        _require_id(self.id, "project id")


@dataclass(frozen=True)
class Datasource:
    id: EntityId
    name: Optional[str] = None

    def __post_init__(self) -> None:
        _require_id(self.id, "datasource id")


@dataclass(frozen=True)
class Community:
    id: EntityId
    name: Optional[str] = None

    def __post_init__(self) -> None:
        _require_id(self.id, "community id")


Entity = Union[ResearchProduct, Organization, Project, Datasource, Community]


@dataclass(frozen=True, order=True)
class Relation:
    source: EntityId
    target: EntityId
    rel_name: str = field(default="")

    def __post_init__(self) -> None:
        _require_id(self.source, "relation source")
        _require_id(self.target, "relation target")
        _require_id(self.rel_name, "relation name")


def display_name(org: Organization) -> Optional[str]:
    """Short legal name if known, otherwise the full legal name."""
    if org.legal_short_name is not None:
        return org.legal_short_name
    return org.legal_name


def classify_access(access: Optional[AccessRight | str]) -> AccessClass:
    if access is None:
        return AccessClass.MISSING
    label = access.label if isinstance(access, AccessRight) else access
    return _CANONICAL_ACCESS.get(label, AccessClass.OTHER)
