"""Scientometric indicators over a :class:`~oakit.store.GraphStore`.

Each query reproduces a relational join over the ``relations`` layer:

* citation counts: publications joined as the *source* of ``IsCitedBy``;
* access-right breakdowns: organisations joined as the source of
  ``isAuthorInstitutionOf`` against any research product as target, one
  counted row per matching relation (bag semantics);
* country co-participation: organisations linked to a project through
  ``isParticipant``, paired by country.

Descending orders break ties on the ascending group key so output is
deterministic.
"""

from __future__ import annotations

import enum
from collections import Counter, defaultdict
from collections.abc import Hashable, Iterable, Sequence
from dataclasses import dataclass, replace
from itertools import combinations
from typing import Optional

import numpy as np

from .model import (
    AFFILIATION,
    CITES,
    PARTICIPATION,
    AccessClass,
    EntityId,
    Pid,
    ProductKind,
    classify_access,
    display_name,
)
from .store import GraphStore


@dataclass(frozen=True)
class CitationCount:
    product_id: EntityId
    canonical_pid: Optional[Pid]
    count: int


@dataclass(frozen=True)
class AccessBreakdownRow:
    """Access-right tallies for one group.

    ``key`` is ``(country,)`` for the country breakdown and
    ``(organization, year)`` for the organisation/year breakdown; either part
    may be ``None``. Products with no access right only count in ``total``.
    """

    key: tuple
    total: int = 0
    open: int = 0
    embargo: int = 0
    closed: int = 0
    other: int = 0


@dataclass(frozen=True)
class CoParticipationEdge:
    left: str
    right: str
    weight: int
    normalized: Optional[float] = None


class CoParticipationMode(str, enum.Enum):
    DISTINCT = "distinct"
    PAPER_COMPAT = "paper-compat"


def _key_order(value: Hashable) -> tuple:
    # None sorts first, as NULLs do in an ascending SQL order
    if isinstance(value, tuple):
        return tuple(_key_order(v) for v in value)
    return (value is not None, value if value is not None else 0)


def citation_counts(store: GraphStore) -> list[CitationCount]:
    rels = store.relations
    positions = rels.positions_named(CITES)
    per_source = np.bincount(rels.source[positions], minlength=len(rels.ids))
    rows = []
    for code in np.flatnonzero(per_source).tolist():
        product = store.products.get(rels.ids[code])
        if product is not None and product.kind is ProductKind.PUBLICATION:
            rows.append(CitationCount(product.id, product.canonical_pid, int(per_source[code])))
    rows.sort(key=lambda r: (-r.count, r.product_id))
    return rows


def _tally(groups: dict[tuple, Counter], key: tuple, access: AccessClass) -> None:
    counter = groups[key]
    counter["total"] += 1
    if access is not AccessClass.MISSING:
        counter[access.value.lower()] += 1


def _rows(groups: dict[tuple, Counter]) -> list[AccessBreakdownRow]:
    return [
        AccessBreakdownRow(
            key,
            total=c["total"],
            open=c["open"],
            embargo=c["embargo"],
            closed=c["closed"],
            other=c["other"],
        )
        for key, c in groups.items()
    ]


def _affiliations(store: GraphStore):
    rels = store.relations
    positions = rels.positions_named(AFFILIATION)
    ids = rels.ids
    for s, t in zip(rels.source[positions].tolist(), rels.target[positions].tolist()):
        org = store.organizations.get(ids[s])
        product = store.products.get(ids[t])
        if org is not None and product is not None:
            yield org, product


def access_breakdown_by_country(store: GraphStore) -> list[AccessBreakdownRow]:
    groups: dict[tuple, Counter] = defaultdict(Counter)
    for org, product in _affiliations(store):
        if org.country_code is not None:
            _tally(groups, (org.country_code,), classify_access(product.best_access_right))
    rows = _rows(groups)
    rows.sort(key=lambda r: (-r.total, _key_order(r.key)))
    return rows


def oa_breakdown_by_org_year(store: GraphStore) -> list[AccessBreakdownRow]:
    groups: dict[tuple, Counter] = defaultdict(Counter)
    for org, product in _affiliations(store):
        year = product.publication_date.year if product.publication_date else None
        _tally(groups, (display_name(org), year), classify_access(product.best_access_right))
    rows = _rows(groups)
    rows.sort(key=lambda r: (_key_order(r.key[0]), -r.total, _key_order(r.key[1])))
    return rows


def _countries_by_project(store: GraphStore) -> dict[EntityId, list[str]]:
    # The project side is taken from the relation target as-is, without
    # requiring a project record, exactly like the relational join.
    rels = store.relations
    positions = rels.positions_named(PARTICIPATION)
    ids = rels.ids
    out: dict[EntityId, list[str]] = defaultdict(list)
    for s, t in zip(rels.source[positions].tolist(), rels.target[positions].tolist()):
        org = store.organizations.get(ids[s])
        if org is not None and org.country_code is not None:
            out[ids[t]].append(org.country_code)
    return out


def co_participation_edges(
    store: GraphStore, mode: CoParticipationMode | str = CoParticipationMode.DISTINCT
) -> list[CoParticipationEdge]:
    """Country pairs weighted by the projects they share.

    ``distinct`` counts each project once per unordered pair of distinct
    countries. ``paper-compat`` reproduces the bag self-join
    ``l.id = r.id AND l.country <= r.country``: a project with ``n_a``
    participations from country *a* and ``n_b`` from *b* adds ``n_a * n_b``
    to (a, b) and ``n_a * n_a`` to the self-pair (a, a).
    """
    mode = CoParticipationMode(mode)
    weights: Counter[tuple[str, str]] = Counter()
    for countries in _countries_by_project(store).values():
        if mode is CoParticipationMode.DISTINCT:
            for pair in combinations(sorted(set(countries)), 2):
                weights[pair] += 1
        else:
            bag = sorted(Counter(countries).items())
            for i, (a, n_a) in enumerate(bag):
                for b, n_b in bag[i:]:
                    weights[a, b] += n_a * n_b
    edges = [CoParticipationEdge(a, b, w) for (a, b), w in weights.items()]
    edges.sort(key=lambda e: (-e.weight, e.left, e.right))
    return edges


def focus_country(
    edges: Iterable[CoParticipationEdge], country: str
) -> list[CoParticipationEdge]:
    return [e for e in edges if e.left == country or e.right == country]


def normalize_weights(edges: Sequence[CoParticipationEdge]) -> list[CoParticipationEdge]:
    """Scale weights into (0, 1] by the maximum weight."""
    if not edges:
        raise ValueError("cannot normalise an empty edge list")
    top = max(e.weight for e in edges)
    return [replace(e, normalized=e.weight / top) for e in edges]
