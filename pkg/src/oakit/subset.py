"""Self-consistent subsets of a graph store.

Construction runs in three steps:

1. seed: research products whose publication date lies in a closed window;
2. expansion: every non-product entity one relation away (either direction)
   from a seed product;
3. induction: every relation with both endpoints selected.

Products are only ever added by the seed step, so products outside the window
stay out even when a seed product cites them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Any, Union

import numpy as np

from .export import write_layout
from .ingest import stats
from .model import EntityId, Relation
from .store import GraphStore


@dataclass(frozen=True)
class DateWindow:
    start: date
    end: date

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValueError(f"window start {self.start} is after its end {self.end}")

    def __contains__(self, day: object) -> bool:
        return isinstance(day, date) and self.start <= day <= self.end


@dataclass(frozen=True)
class SubsetManifest:
    window: DateWindow
    selected: dict[str, tuple[EntityId, ...]]
    counts: dict[str, int]
    relation_count: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "window": {"from": self.window.start.isoformat(), "to": self.window.end.isoformat()},
            "counts": dict(self.counts),
            "relations": self.relation_count,
            "selected": {kind: list(ids) for kind, ids in self.selected.items()},
        }

    def summary(self) -> dict[str, Any]:
        out = self.to_dict()
        del out["selected"]
        return out


def select_seed_products(store: GraphStore, window: DateWindow) -> set[EntityId]:
    return {
        pid for pid, product in store.products.items() if product.publication_date in window
    }


def _touching(store: GraphStore, entity_ids: set[EntityId]) -> np.ndarray:
    rels = store.relations
    marked = store.code_mask(entity_ids)
    return marked[rels.source] | marked[rels.target]


def expand_entities(store: GraphStore, seed: set[EntityId]) -> set[EntityId]:
    """Non-product entities sharing at least one relation with a seed product."""
    rels = store.relations
    touching = _touching(store, seed)
    endpoints = np.unique(np.concatenate([rels.source[touching], rels.target[touching]]))
    found = set()
    for code in endpoints.tolist():
        entity_id = rels.ids[code]
        if entity_id not in store.products and entity_id in store:
            found.add(entity_id)
    return found


def _induced_mask(store: GraphStore, selected: set[EntityId]) -> np.ndarray:
    rels = store.relations
    marked = store.code_mask(selected)
    return marked[rels.source] & marked[rels.target]


def induce_relations(store: GraphStore, selected: set[EntityId]) -> list[Relation]:
    return store.relations.take(np.flatnonzero(_induced_mask(store, selected)))


def extract_subset(store: GraphStore, window: DateWindow) -> tuple[GraphStore, SubsetManifest]:
    seed = select_seed_products(store, window)
    selected = seed | expand_entities(store, seed)
    subset = GraphStore(
        {k: v for k, v in store.products.items() if k in selected},
        {k: v for k, v in store.organizations.items() if k in selected},
        {k: v for k, v in store.projects.items() if k in selected},
        {k: v for k, v in store.datasources.items() if k in selected},
        {k: v for k, v in store.communities.items() if k in selected},
        store.relations.select(_induced_mask(store, selected)),
    )
    counts = stats(subset)
    by_kind: dict[str, list[EntityId]] = {}
    for product in subset.products.values():
        by_kind.setdefault(product.kind.value, []).append(product.id)
    selected_ids = {
        "publication": tuple(sorted(by_kind.get("publication", ()))),
        "dataset": tuple(sorted(by_kind.get("dataset", ()))),
        "software": tuple(sorted(by_kind.get("software", ()))),
        "otherresearchproduct": tuple(sorted(by_kind.get("otherresearchproduct", ()))),
        "datasource": tuple(sorted(subset.datasources)),
        "organization": tuple(sorted(subset.organizations)),
        "project": tuple(sorted(subset.projects)),
        "community": tuple(sorted(subset.communities)),
    }
    del counts["relations"], counts["relation_types"]
    manifest = SubsetManifest(window, selected_ids, counts, len(subset.relations))
    return subset, manifest


def write_subset(
    subset: GraphStore, manifest: SubsetManifest, out: Union[str, Path]
) -> None:
    """Write the subset as a dump directory plus ``manifest.json``."""
    out = Path(out)
    write_layout(subset, out)
    with open(out / "manifest.json", "w", encoding="utf-8", newline="\n") as sink:
        json.dump(manifest.to_dict(), sink, indent=2)
        sink.write("\n")
