"""Serialisation of query results, networks and dump layouts.

All writers are byte-deterministic: numbers are rendered without locale,
reals with at most six fractional digits, and network vertices are ordered
lexicographically by label.
"""

from __future__ import annotations

import io
import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Any, Optional, Union
from xml.sax.saxutils import escape, quoteattr

from .ingest import LAYOUT_DIRS, RELATION_DIR
from .metrics import (
    AccessBreakdownRow,
    CitationCount,
    CoParticipationEdge,
    normalize_weights,
)
from .model import (
    Community,
    Datasource,
    Entity,
    Organization,
    Project,
    Relation,
    ResearchProduct,
)
from .store import GraphStore

Cell = Union[str, int, float, None]

_CSV_SPECIAL = frozenset(',"\r\n')


def format_real(value: float) -> str:
    text = f"{value:.6f}".rstrip("0")
    return text + "0" if text.endswith(".") else text


def _cell(value: Cell) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format_real(value)
    return str(value)


@dataclass(frozen=True)
class TableDocument:
    columns: tuple[str, ...]
    rows: tuple[tuple[Cell, ...], ...]

    def __init__(self, columns: Iterable[str], rows: Iterable[Iterable[Cell]] = ()) -> None:
        columns = tuple(columns)
        rows = tuple(tuple(row) for row in rows)
        for i, row in enumerate(rows):
            if len(row) != len(columns):
                raise ValueError(
                    f"row {i} has {len(row)} cells, expected {len(columns)}"
                )
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "rows", rows)

    def head(self, limit: Optional[int]) -> TableDocument:
        if limit is None:
            return self
        return TableDocument(self.columns, self.rows[:limit])

    def records(self) -> list[dict[str, Cell]]:
        return [dict(zip(self.columns, row)) for row in self.rows]


def _csv_field(text: str) -> str:
    if any(ch in text for ch in _CSV_SPECIAL):
        return '"' + text.replace('"', '""') + '"'
    return text


def write_csv(table: TableDocument, sink: IO[str]) -> None:
    """RFC 4180 CSV with LF record separators; absent cells are empty."""
    sink.write(",".join(_csv_field(c) for c in table.columns) + "\n")
    for row in table.rows:
        sink.write(",".join(_csv_field(_cell(v)) for v in row) + "\n")


def write_json(table: TableDocument, sink: IO[str]) -> None:
    """Array of objects, one per row, keys in column order."""
    json.dump(table.records(), sink, indent=2, ensure_ascii=False)
    sink.write("\n")


def citation_table(rows: Iterable[CitationCount]) -> TableDocument:
    return TableDocument(
        ("id", "pid", "count"),
        (
            (r.product_id, r.canonical_pid.value if r.canonical_pid else None, r.count)
            for r in rows
        ),
    )


_ACCESS_COLUMNS = ("total", "open", "embargo", "closed", "other")


def _access_cells(r: AccessBreakdownRow) -> tuple[int, ...]:
    return (r.total, r.open, r.embargo, r.closed, r.other)


def country_access_table(rows: Iterable[AccessBreakdownRow]) -> TableDocument:
    return TableDocument(
        ("country", *_ACCESS_COLUMNS), ((*r.key, *_access_cells(r)) for r in rows)
    )


def org_year_access_table(rows: Iterable[AccessBreakdownRow]) -> TableDocument:
    return TableDocument(
        ("organization", "pub_year", *_ACCESS_COLUMNS),
        ((*r.key, *_access_cells(r)) for r in rows),
    )


def edge_table(edges: Iterable[CoParticipationEdge], normalized: bool = False) -> TableDocument:
    if normalized:
        return TableDocument(
            ("left", "right", "weight", "normalized_weight"),
            ((e.left, e.right, e.weight, e.normalized) for e in edges),
        )
    return TableDocument(("left", "right", "weight"), ((e.left, e.right, e.weight) for e in edges))


def _ensure_normalized(edges: Sequence[CoParticipationEdge]) -> list[CoParticipationEdge]:
    if edges and any(e.normalized is None for e in edges):
        return normalize_weights(edges)
    return list(edges)


def write_edge_list(
    edges: Sequence[CoParticipationEdge], sink: IO[str], normalized: bool = False
) -> None:
    """Tab-separated weighted edge list with a header row."""
    if normalized:
        edges = _ensure_normalized(edges)
    table = edge_table(edges, normalized)
    sink.write("\t".join(table.columns) + "\n")
    for row in table.rows:
        sink.write("\t".join(_cell(v) for v in row) + "\n")


def _vertices(edges: Iterable[CoParticipationEdge]) -> list[str]:
    return sorted({label for e in edges for label in (e.left, e.right)})


def _weight(edge: CoParticipationEdge, normalized: bool) -> Union[int, float]:
    if normalized:
        assert edge.normalized is not None
        return edge.normalized
    return edge.weight


def write_pajek(
    edges: Sequence[CoParticipationEdge], sink: IO[str], normalized: bool = False
) -> None:
    if normalized:
        edges = _ensure_normalized(edges)
    labels = _vertices(edges)
    number = {label: i for i, label in enumerate(labels, start=1)}
    sink.write(f"*Vertices {len(labels)}\n")
    for label in labels:
        # Pajek has no escape for quotes inside a label
        sink.write(f'{number[label]} "{label.replace(chr(34), chr(39))}"\n')
    sink.write("*Edges\n")
    for e in edges:
        sink.write(f"{number[e.left]} {number[e.right]} {_cell(_weight(e, normalized))}\n")


def write_graphml(
    edges: Sequence[CoParticipationEdge], sink: IO[str], normalized: bool = False
) -> None:
    if normalized:
        edges = _ensure_normalized(edges)
    labels = _vertices(edges)
    node_id = {label: f"n{i}" for i, label in enumerate(labels)}
    sink.write('<?xml version="1.0" encoding="UTF-8"?>\n')
    sink.write('<graphml xmlns="http://graphml.graphdrawing.org/xmlns">\n')
    sink.write('  <key id="label" for="node" attr.name="label" attr.type="string"/>\n')
    sink.write('  <key id="weight" for="edge" attr.name="weight" attr.type="double"/>\n')
    sink.write('  <graph id="G" edgedefault="undirected">\n')
    for label in labels:
        sink.write(f"    <node id={quoteattr(node_id[label])}>\n")
        sink.write(f'      <data key="label">{escape(label)}</data>\n')
        sink.write("    </node>\n")
    for i, e in enumerate(edges):
        sink.write(
            f'    <edge id="e{i}" source={quoteattr(node_id[e.left])} '
            f"target={quoteattr(node_id[e.right])}>\n"
        )
        weight = float(_weight(e, normalized))
        sink.write(f'      <data key="weight">{format_real(weight)}</data>\n')
        sink.write("    </edge>\n")
    sink.write("  </graph>\n")
    sink.write("</graphml>\n")


def render(writer, data: Any, **kwargs: Any) -> str:
    """Run a ``write_*`` function into a string."""
    buffer = io.StringIO()
    writer(data, buffer, **kwargs)
    return buffer.getvalue()


# -- dump layout -------------------------------------------------------------


def entity_to_record(entity: Entity) -> dict[str, Any]:
    """JSON object for ``entity`` in the field layout the ingester reads."""
    record: dict[str, Any] = {"id": entity.id}
    if isinstance(entity, ResearchProduct):
        if entity.pids:
            record["pid"] = [{"scheme": p.scheme, "value": p.value} for p in entity.pids]
        if entity.publication_date is not None:
            record["publicationdate"] = entity.publication_date.isoformat()
        if entity.best_access_right is not None:
            record["bestaccessright"] = {"label": entity.best_access_right.label}
        if entity.title is not None:
            record["title"] = entity.title
    elif isinstance(entity, Organization):
        if entity.legal_name is not None:
            record["legalname"] = entity.legal_name
        if entity.legal_short_name is not None:
            record["legalshortname"] = entity.legal_short_name
        if entity.country_code is not None:
            record["country"] = {"code": entity.country_code}
    elif isinstance(entity, (Project, Datasource, Community)):
        if entity.name is not None:
            record["name"] = entity.name
    else:
        raise TypeError(f"not an entity: {entity!r}")
    return record


def relation_to_record(rel: Relation) -> dict[str, Any]:
    return {"source": rel.source, "target": rel.target, "reltype": {"name": rel.rel_name}}


def to_json_line(record: dict[str, Any]) -> str:
    return json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n"


def layout_dir(entity: Entity) -> str:
    if isinstance(entity, ResearchProduct):
        return entity.kind.value
    return {
        Organization: "organization",
        Project: "project",
        Datasource: "datasource",
        Community: "community",
    }[type(entity)]


def write_layout(store: GraphStore, root: Union[str, Path]) -> None:
    """Write ``store`` as a dump directory (one ``part-00000.json`` per kind).

    Every layout directory is created, empty kinds included. Entities are
    sorted by id and relations by (source, target, name).
    """
    root = Path(root)
    by_dir: dict[str, list[Entity]] = {name: [] for name in LAYOUT_DIRS}
    for entity in store.entities():
        by_dir[layout_dir(entity)].append(entity)
    for name in LAYOUT_DIRS:
        directory = root / name
        directory.mkdir(parents=True, exist_ok=True)
        with open(directory / "part-00000.json", "w", encoding="utf-8", newline="\n") as sink:
            if name == RELATION_DIR:
                for rel in sorted(store.relations):
                    sink.write(to_json_line(relation_to_record(rel)))
            else:
                for entity in sorted(by_dir[name], key=lambda e: e.id):
                    sink.write(to_json_line(entity_to_record(entity)))
