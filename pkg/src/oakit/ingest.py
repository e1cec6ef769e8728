"""Streaming ingestion of JSON-lines graph dumps.

A dump is a directory with one subdirectory per entity kind (``publication``,
``dataset``, ..., ``relation``), each holding ``*.json`` or ``*.json.gz``
files with one JSON object per line. Files are read line by line in binary
mode; nothing is buffered beyond the current line and the store under
construction.
"""

from __future__ import annotations

import gzip
import json
import logging
import re
from collections import deque
from collections.abc import Callable, Iterator
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import date
from itertools import islice
from pathlib import Path
from typing import Any, Optional, Union

from .model import (
    AccessRight,
    Community,
    Datasource,
    Entity,
    Organization,
    Pid,
    ProductKind,
    Project,
    Relation,
    ResearchProduct,
)
from .store import GraphStore, StoreBuilder

logger = logging.getLogger(__name__)

PRODUCT_DIRS = {kind.value: kind for kind in ProductKind}
ENTITY_DIRS = (*PRODUCT_DIRS, "datasource", "organization", "project", "community")
RELATION_DIR = "relation"
LAYOUT_DIRS = (*ENTITY_DIRS, RELATION_DIR)
DATA_SUFFIXES = (".json", ".json.gz")
# directory names used by published dumps for the same kinds
DIR_ALIASES = {"communities_infrastructures": "community"}

_DATE_RE = re.compile(r"(\d{4})(?:-(\d{2})(?:-(\d{2}))?)?")


class RecordRejected(ValueError):
    """A dump line that cannot be turned into a graph value."""


def _field(record: dict, *names: str) -> Any:
    for name in names:
        value = record.get(name)
        if value is not None:
            return value
    return None


def _text(record: dict, *names: str) -> Optional[str]:
    value = _field(record, *names)
    if isinstance(value, str) and value:
        return value
    return None


def _load_object(line: Union[str, bytes]) -> dict:
    try:
        record = json.loads(line)
    except ValueError as exc:
        raise RecordRejected(f"malformed JSON: {exc}") from None
    if not isinstance(record, dict):
        raise RecordRejected(f"expected a JSON object, got {type(record).__name__}")
    return record


def _require(record: dict, key: str, *aliases: str) -> str:
    value = _field(record, key, *aliases)
    if value is None or value == "":
        raise RecordRejected(f"missing {key}")
    if not isinstance(value, str):
        raise RecordRejected(f"{key} must be a string")
    return value


def parse_date(text: str) -> date:
    """Parse ``YYYY-MM-DD``, ``YYYY-MM`` or ``YYYY``; missing parts default to 01."""
    match = _DATE_RE.fullmatch(text.strip())
    if match is None:
        raise ValueError(f"unrecognised date {text!r}")
    year, month, day = match.groups()
    return date(int(year), int(month or 1), int(day or 1))


def _parse_pids(raw: Any) -> tuple[Pid, ...]:
    if isinstance(raw, dict):
        raw = [raw]
    if not isinstance(raw, list):
        return ()
    pids = []
    for item in raw:
        if not isinstance(item, dict):
            continue
        value = item.get("value")
        if isinstance(value, str) and value:
            scheme = item.get("scheme")
            pids.append(Pid(scheme if isinstance(scheme, str) else "", value))
    return tuple(pids)


def _parse_product(kind: ProductKind, record: dict) -> ResearchProduct:
    raw_date = _field(record, "publicationdate", "publicationDate")
    publication_date = None
    if raw_date not in (None, ""):
        if not isinstance(raw_date, str):
            raise RecordRejected(f"unparseable publicationdate {raw_date!r}")
        try:
            publication_date = parse_date(raw_date)
        except ValueError:
            raise RecordRejected(f"unparseable publicationdate {raw_date!r}") from None

    access = _field(record, "bestaccessright", "bestAccessRight")
    label = access.get("label") if isinstance(access, dict) else access
    best_access = AccessRight(label) if isinstance(label, str) and label else None

    return ResearchProduct(
        id=_require(record, "id"),
        kind=kind,
        pids=_parse_pids(_field(record, "pid", "pids")),
        publication_date=publication_date,
        best_access_right=best_access,
        title=_text(record, "title", "maintitle", "mainTitle"),
    )


def _parse_organization(record: dict) -> Organization:
    country = record.get("country")
    code = country.get("code") if isinstance(country, dict) else country
    return Organization(
        id=_require(record, "id"),
        legal_name=_text(record, "legalname", "legalName"),
        legal_short_name=_text(record, "legalshortname", "legalShortName"),
        country_code=code if isinstance(code, str) and code else None,
    )


_NAME_FIELDS = ("name", "title", "officialname", "officialName", "label")

_STUB_TYPES: dict[str, type] = {
    "project": Project,
    "datasource": Datasource,
    "community": Community,
}


def parse_entity_record(kind: str, line: Union[str, bytes]) -> Entity:
    """Map one dump line of entity ``kind`` (a layout directory name) to a value.

    Raises :class:`RecordRejected` for malformed JSON, a missing or empty
    ``id`` and an unparseable ``publicationdate``. Unknown fields are ignored.
    """
    record = _load_object(line)
    if kind in PRODUCT_DIRS:
        return _parse_product(PRODUCT_DIRS[kind], record)
    if kind == "organization":
        return _parse_organization(record)
    if kind in _STUB_TYPES:
        return _STUB_TYPES[kind](_require(record, "id"), _text(record, *_NAME_FIELDS))
    raise ValueError(f"unknown entity kind {kind!r}")


def _relation_fields(line: Union[str, bytes]) -> tuple[str, str, str]:
    record = _load_object(line)
    source = _require(record, "source")
    target = _require(record, "target")
    reltype = _field(record, "reltype", "relType")
    name = reltype.get("name") if isinstance(reltype, dict) else None
    if not isinstance(name, str) or not name:
        raise RecordRejected("missing reltype.name")
    return source, target, name


def parse_relation_record(line: Union[str, bytes]) -> Relation:
    return Relation(*_relation_fields(line))


@dataclass
class KindCounts:
    read: int = 0
    accepted: int = 0
    rejected: int = 0


@dataclass(frozen=True)
class Rejection:
    file: str
    line: int
    reason: str


@dataclass
class IngestReport:
    counts: dict[str, KindCounts] = field(
        default_factory=lambda: {kind: KindCounts() for kind in LAYOUT_DIRS}
    )
    rejections: list[Rejection] = field(default_factory=list)
    file_errors: list[dict[str, str]] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    duplicate_ids: int = 0
    dangling_relations: int = 0

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


@dataclass(frozen=True)
class DumpLayout:
    root: Path

    def __post_init__(self) -> None:
        object.__setattr__(self, "root", Path(self.root))

    def files(self, kind: str) -> list[Path]:
        names = [kind, *(alias for alias, k in DIR_ALIASES.items() if k == kind)]
        found = []
        for name in names:
            directory = self.root / name
            if directory.is_dir():
                found.extend(
                    sorted(
                        p
                        for p in directory.iterdir()
                        if p.is_file() and p.name.endswith(DATA_SUFFIXES)
                    )
                )
        return found

    def ignored(self) -> list[Path]:
        """Entries that are not part of the layout, plus non-data files inside it."""
        out = []
        for entry in sorted(self.root.iterdir()):
            if entry.name.startswith("."):
                continue
            if not entry.is_dir():
                if entry.name != "manifest.json":
                    out.append(entry)
            elif entry.name not in LAYOUT_DIRS and entry.name not in DIR_ALIASES:
                out.append(entry)
            else:
                out.extend(
                    p
                    for p in sorted(entry.iterdir())
                    if not p.name.startswith(".") and not p.name.endswith(DATA_SUFFIXES)
                )
        return out


def _open_lines(path: Path) -> Iterator[bytes]:
    opener: Callable[..., Any] = gzip.open if path.name.endswith(".gz") else open
    with opener(path, "rb") as handle:
        yield from handle


Outcome = Union[Entity, tuple[str, str, str], RecordRejected]


def _iter_outcomes(kind: str, path: Path) -> Iterator[tuple[int, Outcome]]:
    for lineno, line in enumerate(_open_lines(path), start=1):
        if not line.strip():
            continue
        try:
            if kind == RELATION_DIR:
                yield lineno, _relation_fields(line)
            else:
                yield lineno, parse_entity_record(kind, line)
        except RecordRejected as exc:
            yield lineno, exc


def _parse_whole_file(
    kind: str, path: Path
) -> tuple[list[tuple[int, Outcome]], Optional[BaseException]]:
    outcomes: list[tuple[int, Outcome]] = []
    try:
        outcomes.extend(_iter_outcomes(kind, path))
    except (OSError, EOFError) as exc:
        return outcomes, exc
    return outcomes, None


class _Merger:
    def __init__(self, root: Path) -> None:
        self.root = root
        self.builder = StoreBuilder()
        self.report = IngestReport()

    def consume(self, kind: str, path: Path, outcomes) -> None:
        rel_path = path.relative_to(self.root).as_posix()
        counts = self.report.counts[kind]
        for lineno, outcome in outcomes:
            counts.read += 1
            if isinstance(outcome, RecordRejected):
                counts.rejected += 1
                self.report.rejections.append(Rejection(rel_path, lineno, str(outcome)))
            elif kind == RELATION_DIR:
                counts.accepted += 1
                self.builder.add_relation(*outcome)
            else:
                counts.accepted += 1
                replaced = self.builder.add_entity(outcome)
                if replaced is not None:
                    self.report.duplicate_ids += 1
                    self.report.warnings.append(
                        f"duplicate id {outcome.id!r} at {rel_path}:{lineno} replaces an earlier record"
                    )

    def file_error(self, path: Path, exc: BaseException) -> None:
        rel_path = path.relative_to(self.root).as_posix()
        logger.warning("read error in %s: %s", rel_path, exc)
        self.report.file_errors.append({"file": rel_path, "error": str(exc)})


def build_store(
    layout: Union[DumpLayout, str, Path], threads: int = 1
) -> tuple[GraphStore, IngestReport]:
    """Read every data file of ``layout`` into a :class:`GraphStore`.

    Files are visited in a fixed order (layout directory order, then file
    name), and with ``threads > 1`` they are parsed concurrently but merged
    in that same order, so the result does not depend on the worker count.
    Per-line problems and per-file read errors end up in the report; only an
    unreadable root raises.
    """
    if not isinstance(layout, DumpLayout):
        layout = DumpLayout(Path(layout))
    root = layout.root
    if not root.is_dir():
        raise FileNotFoundError(f"dump directory not found: {root}")

    merger = _Merger(root)
    for entry in layout.ignored():
        message = f"ignoring {entry.relative_to(root).as_posix()}: not part of the dump layout"
        logger.warning(message)
        merger.report.warnings.append(message)

    jobs = [(kind, path) for kind in LAYOUT_DIRS for path in layout.files(kind)]
    if threads <= 1:
        for kind, path in jobs:
            try:
                merger.consume(kind, path, _iter_outcomes(kind, path))
            except (OSError, EOFError) as exc:
                merger.file_error(path, exc)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            # bounded lookahead: at most `threads` parsed files held at once
            pending: deque[tuple[str, Path, Future]] = deque()
            queue = iter(jobs)

            def submit(kind: str, path: Path) -> None:
                pending.append((kind, path, pool.submit(_parse_whole_file, kind, path)))

            for job in islice(queue, threads):
                submit(*job)
            while pending:
                kind, path, future = pending.popleft()
                nxt = next(queue, None)
                if nxt is not None:
                    submit(*nxt)
                outcomes, error = future.result()
                merger.consume(kind, path, outcomes)
                if error is not None:
                    merger.file_error(path, error)

    store = merger.builder.build()
    report = merger.report
    report.dangling_relations = store.dangling_relation_count()
    if report.dangling_relations:
        report.warnings.append(
            f"{report.dangling_relations} relation(s) reference ids with no entity record"
        )
    return store, report


def stats(store: GraphStore) -> dict[str, int]:
    """Exact entity counts per kind, relation count and distinct relation types."""
    by_kind = {kind: 0 for kind in ProductKind}
    for product in store.products.values():
        by_kind[product.kind] += 1
    rels = store.relations
    return {
        "publications": by_kind[ProductKind.PUBLICATION],
        "datasets": by_kind[ProductKind.DATASET],
        "software": by_kind[ProductKind.SOFTWARE],
        "others": by_kind[ProductKind.OTHER],
        "datasources": len(store.datasources),
        "organizations": len(store.organizations),
        "communities": len(store.communities),
        "projects": len(store.projects),
        "relations": len(rels),
        "relation_types": len(set(rels.name.tolist())),
    }
