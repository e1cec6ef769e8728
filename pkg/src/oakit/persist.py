"""On-disk format for a built :class:`GraphStore`.

Layout::

    b"OAKSTORE"  version:u8  { tag:4s  length:u64le  zlib(payload) }*

Sections, in order: ``ENTS`` (JSON lines, ``[layout dir, record]``), ``IDS_``
and ``NAME`` (JSON arrays of the interned endpoint ids and relation names),
then ``SRC_``, ``TGT_``, ``RNAM`` (little-endian ``int32`` relation columns).
A different magic or version is refused rather than guessed at.
"""

from __future__ import annotations

import json
import os
import struct
import zlib
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from .export import entity_to_record, layout_dir
from .ingest import parse_entity_record
from .store import GraphStore, RelationTable

MAGIC = b"OAKSTORE"
VERSION = 1
_SECTIONS = (b"ENTS", b"IDS_", b"NAME", b"SRC_", b"TGT_", b"RNAM")
_LENGTH = struct.Struct("<Q")


class StoreFormatError(ValueError):
    """The file is not a store, or was written by an incompatible version."""


def _write_section(sink: BinaryIO, tag: bytes, payload: bytes) -> None:
    data = zlib.compress(payload, 6)
    sink.write(tag)
    sink.write(_LENGTH.pack(len(data)))
    sink.write(data)


def _read_section(source: BinaryIO, tag: bytes) -> bytes:
    found = source.read(4)
    if found != tag:
        raise StoreFormatError(f"expected section {tag!r}, found {found!r}")
    raw = source.read(_LENGTH.size)
    if len(raw) != _LENGTH.size:
        raise StoreFormatError("truncated store file")
    (length,) = _LENGTH.unpack(raw)
    data = source.read(length)
    if len(data) != length:
        raise StoreFormatError("truncated store file")
    return zlib.decompress(data)


def _column(array: np.ndarray) -> bytes:
    return np.ascontiguousarray(array, dtype="<i4").tobytes()


def save_store(store: GraphStore, path: Union[str, Path]) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    rels = store.relations
    entities = "".join(
        json.dumps([layout_dir(e), entity_to_record(e)], ensure_ascii=False, separators=(",", ":"))
        + "\n"
        for e in store.entities()
    )
    with open(tmp, "wb") as sink:
        sink.write(MAGIC)
        sink.write(bytes([VERSION]))
        _write_section(sink, b"ENTS", entities.encode("utf-8"))
        _write_section(sink, b"IDS_", json.dumps(rels.ids, ensure_ascii=False).encode("utf-8"))
        _write_section(sink, b"NAME", json.dumps(rels.names, ensure_ascii=False).encode("utf-8"))
        _write_section(sink, b"SRC_", _column(rels.source))
        _write_section(sink, b"TGT_", _column(rels.target))
        _write_section(sink, b"RNAM", _column(rels.name))
    os.replace(tmp, path)


def load_store(path: Union[str, Path]) -> GraphStore:
    with open(path, "rb") as source:
        if source.read(len(MAGIC)) != MAGIC:
            raise StoreFormatError(f"{path} is not a store file")
        version = source.read(1)
        if not version or version[0] != VERSION:
            found = version[0] if version else None
            raise StoreFormatError(
                f"{path} has store format version {found}, this build reads version {VERSION}"
            )
        ents, ids, names, src, tgt, rnam = (_read_section(source, tag) for tag in _SECTIONS)

    maps: dict[str, dict] = {
        "product": {},
        "organization": {},
        "project": {},
        "datasource": {},
        "community": {},
    }
    for line in ents.decode("utf-8").splitlines():
        kind, record = json.loads(line)
        entity = parse_entity_record(kind, json.dumps(record))
        maps["product" if kind not in maps else kind][entity.id] = entity

    id_table, name_table = json.loads(ids), json.loads(names)
    columns = [np.frombuffer(raw, dtype="<i4") for raw in (src, tgt, rnam)]
    limits = (len(id_table), len(id_table), len(name_table))
    for column, limit in zip(columns, limits):
        if len(column) and (column.min() < 0 or column.max() >= limit):
            raise StoreFormatError("relation column references an unknown code")
    relations = RelationTable(id_table, name_table, *columns)
    return GraphStore(
        maps["product"],
        maps["organization"],
        maps["project"],
        maps["datasource"],
        maps["community"],
        relations,
    )
