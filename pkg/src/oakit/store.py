"""Immutable indexed graph store.

Relations are held column-wise: every endpoint id is interned once and the
edges become three ``int32`` arrays (source code, target code, name code).
Adjacency by source, by target and by relation name is a CSR-style index
(a stable argsort plus offsets), so a lookup returns a view of positions
into the relation columns without materialising ``Relation`` objects.
"""

from __future__ import annotations

import array
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass
from types import MappingProxyType
from typing import Optional, overload

import numpy as np

from .model import (
    Community,
    Datasource,
    Entity,
    EntityId,
    Organization,
    ProductKind,
    Project,
    Relation,
    ResearchProduct,
)


class _Interner:
    __slots__ = ("codes", "values")

    def __init__(self) -> None:
        self.codes: dict[str, int] = {}
        self.values: list[str] = []

    def __call__(self, value: str) -> int:
        code = self.codes.get(value)
        if code is None:
            code = len(self.values)
            self.codes[value] = code
            self.values.append(value)
        return code


@dataclass(frozen=True)
class _CsrIndex:
    order: np.ndarray
    offsets: np.ndarray

    @classmethod
    def build(cls, keys: np.ndarray, n_keys: int) -> _CsrIndex:
        order = np.argsort(keys, kind="stable").astype(np.int32)
        counts = np.bincount(keys, minlength=n_keys)
        offsets = np.zeros(n_keys + 1, dtype=np.int64)
        np.cumsum(counts, out=offsets[1:])
        order.flags.writeable = False
        offsets.flags.writeable = False
        return cls(order, offsets)

    def lookup(self, key: Optional[int]) -> np.ndarray:
        if key is None or key >= len(self.offsets) - 1:
            return self.order[:0]
        return self.order[self.offsets[key] : self.offsets[key + 1]]


class RelationTable(Sequence[Relation]):
    """Read-only sequence of relations backed by interned integer columns."""

    def __init__(
        self,
        ids: Sequence[str],
        names: Sequence[str],
        source: np.ndarray,
        target: np.ndarray,
        name: np.ndarray,
        id_codes: Optional[dict[str, int]] = None,
    ) -> None:
        if not (len(source) == len(target) == len(name)):
            raise ValueError("relation columns must have equal length")
        self.ids = tuple(ids)
        self.names = tuple(names)
        if id_codes is None:
            id_codes = {value: code for code, value in enumerate(self.ids)}
        self._id_codes = id_codes
        self._name_codes = {value: code for code, value in enumerate(self.names)}
        self.source = np.ascontiguousarray(source, dtype=np.int32)
        self.target = np.ascontiguousarray(target, dtype=np.int32)
        self.name = np.ascontiguousarray(name, dtype=np.int32)
        for column in (self.source, self.target, self.name):
            column.flags.writeable = False
        self._by_source = _CsrIndex.build(self.source, len(self.ids))
        self._by_target = _CsrIndex.build(self.target, len(self.ids))
        self._by_name = _CsrIndex.build(self.name, len(self.names))

    def __len__(self) -> int:
        return len(self.source)

    @overload
    def __getitem__(self, i: int) -> Relation: ...

    @overload
    def __getitem__(self, i: slice) -> list[Relation]: ...

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[j] for j in range(*i.indices(len(self)))]
        return Relation(
            self.ids[self.source[i]], self.ids[self.target[i]], self.names[self.name[i]]
        )

    def __iter__(self) -> Iterator[Relation]:
        ids, names = self.ids, self.names
        for s, t, n in zip(self.source.tolist(), self.target.tolist(), self.name.tolist()):
            yield Relation(ids[s], ids[t], names[n])

    def code_of(self, entity_id: EntityId) -> Optional[int]:
        return self._id_codes.get(entity_id)

    def name_code(self, rel_name: str) -> Optional[int]:
        return self._name_codes.get(rel_name)

    def positions_from(self, entity_id: EntityId) -> np.ndarray:
        return self._by_source.lookup(self.code_of(entity_id))

    def positions_to(self, entity_id: EntityId) -> np.ndarray:
        return self._by_target.lookup(self.code_of(entity_id))

    def positions_named(self, rel_name: str) -> np.ndarray:
        return self._by_name.lookup(self.name_code(rel_name))

    def take(self, positions: Iterable[int]) -> list[Relation]:
        return [self[int(p)] for p in positions]

    def outgoing(self, entity_id: EntityId) -> list[Relation]:
        return self.take(self.positions_from(entity_id))

    def incoming(self, entity_id: EntityId) -> list[Relation]:
        return self.take(self.positions_to(entity_id))

    def named(self, rel_name: str) -> list[Relation]:
        return self.take(self.positions_named(rel_name))

    def multiset(self) -> Counter[tuple[str, str, str]]:
        return Counter((r.source, r.target, r.rel_name) for r in self)

    def select(self, mask: np.ndarray) -> RelationTable:
        """Relations where ``mask`` is true, re-interned to the ids they use."""
        source, target, name = self.source[mask], self.target[mask], self.name[mask]
        used, inverse = np.unique(np.concatenate([source, target]), return_inverse=True)
        used_names, name_inverse = np.unique(name, return_inverse=True)
        n = len(source)
        return RelationTable(
            [self.ids[c] for c in used.tolist()],
            [self.names[c] for c in used_names.tolist()],
            inverse[:n],
            inverse[n:],
            name_inverse,
        )

    @classmethod
    def empty(cls) -> RelationTable:
        nothing = np.zeros(0, dtype=np.int32)
        return cls((), (), nothing, nothing, nothing)


class GraphStore:
    """All entities of a dump plus the indexed relation layer.

    Equality is value equality: same entities by kind and the same multiset of
    relations, irrespective of the order in which they were loaded.
    """

    def __init__(
        self,
        products: Mapping[EntityId, ResearchProduct],
        organizations: Mapping[EntityId, Organization],
        projects: Mapping[EntityId, Project],
        datasources: Mapping[EntityId, Datasource],
        communities: Mapping[EntityId, Community],
        relations: RelationTable,
    ) -> None:
        self.products = MappingProxyType(dict(products))
        self.organizations = MappingProxyType(dict(organizations))
        self.projects = MappingProxyType(dict(projects))
        self.datasources = MappingProxyType(dict(datasources))
        self.communities = MappingProxyType(dict(communities))
        self.relations = relations

    @classmethod
    def from_records(
        cls, entities: Iterable[Entity] = (), relations: Iterable[Relation] = ()
    ) -> GraphStore:
        builder = StoreBuilder()
        for entity in entities:
            builder.add_entity(entity)
        for rel in relations:
            builder.add_relation(rel.source, rel.target, rel.rel_name)
        return builder.build()

    def entity_maps(self) -> tuple[Mapping[EntityId, Entity], ...]:
        return (
            self.products,
            self.organizations,
            self.projects,
            self.datasources,
            self.communities,
        )

    def entities(self) -> Iterator[Entity]:
        for mapping in self.entity_maps():
            yield from mapping.values()

    def get(self, entity_id: EntityId) -> Optional[Entity]:
        for mapping in self.entity_maps():
            entity = mapping.get(entity_id)
            if entity is not None:
                return entity
        return None

    def __contains__(self, entity_id: object) -> bool:
        return any(entity_id in mapping for mapping in self.entity_maps())

    def products_of_kind(self, kind: ProductKind) -> list[ResearchProduct]:
        return [p for p in self.products.values() if p.kind is kind]

    def code_mask(self, entity_ids: Iterable[EntityId]) -> np.ndarray:
        """Boolean array over relation endpoint codes marking ``entity_ids``."""
        mask = np.zeros(len(self.relations.ids), dtype=bool)
        codes = [self.relations.code_of(e) for e in entity_ids]
        mask[[c for c in codes if c is not None]] = True
        return mask

    def dangling_relation_count(self) -> int:
        present = self.code_mask(
            e for mapping in self.entity_maps() for e in mapping
        )
        rels = self.relations
        return int(np.count_nonzero(~(present[rels.source] & present[rels.target])))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GraphStore):
            return NotImplemented
        return all(
            dict(a) == dict(b) for a, b in zip(self.entity_maps(), other.entity_maps())
        ) and self.relations.multiset() == other.relations.multiset()

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return (
            f"GraphStore(products={len(self.products)}, "
            f"organizations={len(self.organizations)}, projects={len(self.projects)}, "
            f"datasources={len(self.datasources)}, communities={len(self.communities)}, "
            f"relations={len(self.relations)})"
        )


def _as_int32(buffer: array.array) -> np.ndarray:
    if not buffer:
        return np.zeros(0, dtype=np.int32)
    return np.frombuffer(buffer, dtype=np.int32)


class StoreBuilder:
    """Single-writer accumulator used while streaming a dump.

    Relation columns grow as compact ``array('i')`` buffers; ids are interned
    as they arrive. Re-adding an entity id replaces the earlier record (last
    write wins) and the replaced kind is reported back to the caller.
    """

    def __init__(self) -> None:
        self._maps: dict[type, dict[EntityId, Entity]] = {
            ResearchProduct: {},
            Organization: {},
            Project: {},
            Datasource: {},
            Community: {},
        }
        self._ids = _Interner()
        self._names = _Interner()
        self._source = array.array("i")
        self._target = array.array("i")
        self._name = array.array("i")

    def add_entity(self, entity: Entity) -> Optional[type]:
        """Insert ``entity``; return the type of a record it replaced, if any."""
        replaced = None
        for kind, mapping in self._maps.items():
            if mapping.pop(entity.id, None) is not None:
                replaced = kind
        self._maps[type(entity)][entity.id] = entity
        return replaced

    def add_relation(self, source: EntityId, target: EntityId, rel_name: str) -> None:
        self._source.append(self._ids(source))
        self._target.append(self._ids(target))
        self._name.append(self._names(rel_name))

    def build(self) -> GraphStore:
        relations = RelationTable(
            self._ids.values,
            self._names.values,
            _as_int32(self._source),
            _as_int32(self._target),
            _as_int32(self._name),
            id_codes=self._ids.codes,
        )
        self._source = self._target = self._name = array.array("i")
        return GraphStore(
            self._maps[ResearchProduct],
            self._maps[Organization],
            self._maps[Project],
            self._maps[Datasource],
            self._maps[Community],
            relations,
        )
