"""Shared fixtures, random graph generators and naive reference implementations.

The reference implementations only use plain lists and nested loops over the
entity and relation values; they never touch the store's columns or indexes.
"""

from __future__ import annotations

import gzip
import json
import random
from collections import Counter
from datetime import date, timedelta
from pathlib import Path

from hypothesis import strategies as st

from oakit.export import entity_to_record, layout_dir, relation_to_record, to_json_line
from oakit.model import (
    AccessRight,
    Community,
    Datasource,
    Organization,
    Pid,
    ProductKind,
    Project,
    Relation,
    ResearchProduct,
)
from oakit.store import GraphStore
from oakit.subset import DateWindow

PUB = ProductKind.PUBLICATION


# -- Fixture-A ---------------------------------------------------------------

FIXTURE_A_ENTITIES = [
    ResearchProduct("P1", PUB, (Pid("doi", "10.1/a"),), date(2023, 7, 1), AccessRight("OPEN")),
    ResearchProduct("P2", PUB, (), date(2023, 8, 1), AccessRight("CLOSED")),
    ResearchProduct("P3", PUB, (), date(2024, 1, 1), AccessRight("EMBARGO")),
    Organization("O1", legal_short_name="CNR", country_code="IT"),
    Organization("O2", legal_name="CNRS", country_code="FR"),
    Organization("O3", country_code="IT"),
    Project("J1"),
]

FIXTURE_A_RELATIONS = [
    Relation("P1", "P2", "IsCitedBy"),
    Relation("P1", "P3", "IsCitedBy"),
    Relation("P2", "P3", "IsCitedBy"),
    Relation("O1", "P1", "isAuthorInstitutionOf"),
    Relation("O1", "P2", "isAuthorInstitutionOf"),
    Relation("O2", "P1", "isAuthorInstitutionOf"),
    Relation("O1", "J1", "isParticipant"),
    Relation("O2", "J1", "isParticipant"),
    Relation("O3", "J1", "isParticipant"),
]

# Fixture-A as raw dump lines, written by hand rather than by the exporter.
FIXTURE_A_LINES = {
    "publication": [
        '{"id":"P1","publicationdate":"2023-07-01","bestaccessright":{"label":"OPEN"},'
        '"pid":[{"scheme":"doi","value":"10.1/a"}]}',
        '{"id":"P2","publicationdate":"2023-08-01","bestaccessright":{"label":"CLOSED"}}',
        '{"id":"P3","publicationdate":"2024-01-01","bestaccessright":{"label":"EMBARGO"}}',
    ],
    "organization": [
        '{"id":"O1","legalshortname":"CNR","country":{"code":"IT"}}',
        '{"id":"O2","legalname":"CNRS","country":{"code":"FR"}}',
        '{"id":"O3","country":{"code":"IT"}}',
    ],
    "project": ['{"id":"J1"}'],
    "relation": [
        json.dumps({"source": r.source, "target": r.target, "reltype": {"name": r.rel_name}})
        for r in FIXTURE_A_RELATIONS
    ],
}


def fixture_a() -> GraphStore:
    return GraphStore.from_records(FIXTURE_A_ENTITIES, FIXTURE_A_RELATIONS)


# -- Fixture-B ---------------------------------------------------------------
# Every product is dated, every non-product entity touches some product and
# no relation dangles, so a window covering everything keeps the whole store.

FIXTURE_B_ENTITIES = [
    ResearchProduct("pub1", PUB, publication_date=date(2023, 6, 30)),
    ResearchProduct("pub2", PUB, publication_date=date(2024, 2, 29)),
    ResearchProduct("pub3", PUB, publication_date=date(2023, 6, 29)),
    ResearchProduct("pub4", PUB, publication_date=date(2024, 3, 1)),
    ResearchProduct("ds1", ProductKind.DATASET, publication_date=date(2023, 12, 1)),
    ResearchProduct("sw1", ProductKind.SOFTWARE, publication_date=date(2022, 1, 1)),
    ResearchProduct("oth1", ProductKind.OTHER, publication_date=date(2023, 9, 1)),
    Organization("org1", legal_name="Org One", country_code="IT"),
    Organization("org2", legal_name="Org Two", country_code="FR"),
    Organization("org3", legal_name="Org Three", country_code="DE"),
    Project("prj1"),
    Project("prj2"),
    Datasource("dsrc1"),
    Community("comm1"),
    Community("comm2"),
]

FIXTURE_B_RELATIONS = [
    Relation("pub1", "pub2", "IsCitedBy"),  # kept
    Relation("pub1", "pub3", "IsCitedBy"),  # pub3 outside window
    Relation("org1", "pub1", "isAuthorInstitutionOf"),  # kept
    Relation("org2", "pub3", "isAuthorInstitutionOf"),
    Relation("ds1", "org3", "hasAuthorInstitution"),  # kept, product is target side
    Relation("pub2", "prj1", "isProducedBy"),  # kept
    Relation("org1", "prj2", "isParticipant"),  # prj2 not reached
    Relation("org1", "prj1", "isParticipant"),  # kept, org-project
    Relation("pub1", "dsrc1", "isHostedBy"),  # kept
    Relation("oth1", "comm1", "IsRelatedTo"),  # kept
    Relation("comm2", "pub4", "IsRelatedTo"),
    Relation("sw1", "prj2", "isProducedBy"),
    Relation("org3", "prj2", "isParticipant"),
]

KIT_WINDOW = DateWindow(date(2023, 6, 30), date(2024, 2, 29))

FIXTURE_B_FULL_STATS = {
    "publications": 4,
    "datasets": 1,
    "software": 1,
    "others": 1,
    "datasources": 1,
    "organizations": 3,
    "communities": 2,
    "projects": 2,
    "relations": 13,
    "relation_types": 7,
}

# hand-traced against the comments on FIXTURE_B_RELATIONS
FIXTURE_B_KIT_WINDOW_COUNTS = {
    "publications": 2,
    "datasets": 1,
    "software": 0,
    "others": 1,
    "datasources": 1,
    "organizations": 2,
    "communities": 1,
    "projects": 1,
}
FIXTURE_B_KIT_WINDOW_RELATIONS = 7


def fixture_b() -> GraphStore:
    return GraphStore.from_records(FIXTURE_B_ENTITIES, FIXTURE_B_RELATIONS)


# -- dump writing -------------------------------------------------------------


def write_lines(root: Path, kind: str, lines: list[str], name: str = "part-00000.json") -> Path:
    directory = root / kind
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / name
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def write_fixture_a(root: Path) -> Path:
    for kind, lines in FIXTURE_A_LINES.items():
        write_lines(root, kind, lines)
    return root


def write_graph(root: Path, entities, relations, shards: int) -> Path:
    """Spread a graph over ``shards`` files per kind, mixing plain and gzip."""
    buckets: dict[str, list[str]] = {}
    for e in entities:
        buckets.setdefault(layout_dir(e), []).append(to_json_line(entity_to_record(e)))
    buckets["relation"] = [to_json_line(relation_to_record(r)) for r in relations]
    for kind, lines in buckets.items():
        directory = root / kind
        directory.mkdir(parents=True)
        for k in range(shards):
            chunk = "".join(lines[k::shards]).encode()
            if k % 2:
                (directory / f"part-{k:03d}.json.gz").write_bytes(gzip.compress(chunk))
            else:
                (directory / f"part-{k:03d}.json").write_bytes(chunk)
    return root


# -- random graphs -------------------------------------------------------------

REL_NAMES = (
    "IsCitedBy",
    "isAuthorInstitutionOf",
    "isParticipant",
    "isProducedBy",
    "IsRelatedTo",
    "hasAuthorInstitution",
)
COUNTRIES = ("IT", "FR", "DE", "ES", "NL")
LABELS = ("OPEN", "EMBARGO", "CLOSED", "RESTRICTED", "open")
EPOCH = date(2022, 1, 1)
SPAN_DAYS = (date(2024, 12, 31) - EPOCH).days


def random_graph(rng: random.Random, max_entities: int = 200, max_relations: int = 1000):
    """Entities and relations of a random store (ids unique, relations may dangle)."""
    n = rng.randint(1, max_entities)
    entities = []
    for i in range(n):
        roll = rng.random()
        if roll < 0.55:
            entities.append(
                ResearchProduct(
                    f"r{i}",
                    rng.choice(list(ProductKind)),
                    tuple(Pid("doi", f"10.{i}/{k}") for k in range(rng.randint(0, 2))),
                    None if rng.random() < 0.1 else EPOCH + timedelta(rng.randint(0, SPAN_DAYS)),
                    None if rng.random() < 0.1 else AccessRight(rng.choice(LABELS)),
                )
            )
        elif roll < 0.75:
            entities.append(
                Organization(
                    f"o{i}",
                    legal_name=rng.choice([None, f"Org {i}", "Shared Name"]),
                    legal_short_name=rng.choice([None, None, f"O{i}", "SHORT"]),
                    country_code=None if rng.random() < 0.15 else rng.choice(COUNTRIES),
                )
            )
        elif roll < 0.9:
            entities.append(Project(f"j{i}"))
        elif roll < 0.96:
            entities.append(Datasource(f"d{i}"))
        else:
            entities.append(Community(f"c{i}"))

    products = [e.id for e in entities if isinstance(e, ResearchProduct)]
    orgs = [e.id for e in entities if isinstance(e, Organization)]
    projects = [e.id for e in entities if isinstance(e, Project)]
    every = [e.id for e in entities]
    ghosts = [f"ghost{i}" for i in range(5)]

    def pick(pool: list[str]) -> str:
        if pool and rng.random() < 0.85:
            return rng.choice(pool)
        return rng.choice(every + ghosts)

    relations = []
    for _ in range(rng.randint(0, max_relations)):
        name = rng.choice(REL_NAMES)
        if name == "IsCitedBy":
            rel = Relation(pick(products), pick(products), name)
        elif name == "isAuthorInstitutionOf":
            rel = Relation(pick(orgs), pick(products), name)
        elif name == "isParticipant":
            rel = Relation(pick(orgs), pick(projects), name)
        else:
            rel = Relation(pick(every), pick(every), name)
        relations.append(rel)
        if rng.random() < 0.03:
            relations.append(rel)
    return entities, relations


def random_window(rng: random.Random) -> DateWindow:
    a = EPOCH - timedelta(180) + timedelta(rng.randint(0, SPAN_DAYS + 360))
    b = a + timedelta(rng.randint(0, 500))
    return DateWindow(a, b)


@st.composite
def graphs(draw, max_entities: int = 30, max_relations: int = 80):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_graph(random.Random(seed), max_entities, max_relations)


@st.composite
def windows(draw):
    start = draw(st.dates(min_value=date(2021, 6, 1), max_value=date(2025, 6, 1)))
    length = draw(st.integers(min_value=0, max_value=600))
    return DateWindow(start, start + timedelta(length))


# -- reference implementations ---------------------------------------------------


def _products(entities):
    return [e for e in entities if isinstance(e, ResearchProduct)]


def ref_subset(entities, relations, window: DateWindow):
    """Three naive passes; returns (selected ids, induced relation multiset)."""
    seed = []
    for p in _products(entities):
        if p.publication_date is not None and window.start <= p.publication_date <= window.end:
            seed.append(p.id)

    seed_set = set(seed)
    non_products = {e.id for e in entities if not isinstance(e, ResearchProduct)}
    reached = set()
    for rel in relations:
        if rel.source in seed_set and rel.target in non_products:
            reached.add(rel.target)
        if rel.target in seed_set and rel.source in non_products:
            reached.add(rel.source)

    selected = set(seed) | reached
    induced = Counter()
    for rel in relations:
        if rel.source in selected and rel.target in selected:
            induced[rel.source, rel.target, rel.rel_name] += 1
    return selected, induced


def ref_citation_counts(entities, relations):
    rows = []
    for p in _products(entities):
        if p.kind is not PUB:
            continue
        count = 0
        for rel in relations:
            if rel.source == p.id and rel.rel_name == "IsCitedBy":
                count += 1
        if count:
            rows.append((p.id, p.pids[0] if p.pids else None, count))
    return sorted(rows, key=lambda r: (-r[2], r[0]))


def _access_column(product):
    label = product.best_access_right.label if product.best_access_right else None
    if label is None:
        return None
    return {"OPEN": "open", "EMBARGO": "embargo", "CLOSED": "closed"}.get(label, "other")


def _affiliation_join(entities, relations):
    orgs = [e for e in entities if isinstance(e, Organization)]
    results = _products(entities)
    for rel in relations:
        if rel.rel_name != "isAuthorInstitutionOf":
            continue
        for org in orgs:
            if org.id != rel.source:
                continue
            for res in results:
                if res.id == rel.target:
                    yield org, res


def _null_first(value):
    return (value is not None, value if value is not None else 0)


def ref_access_by_country(entities, relations):
    groups: dict = {}
    for org, res in _affiliation_join(entities, relations):
        if org.country_code is None:
            continue
        row = groups.setdefault(org.country_code, Counter())
        row["total"] += 1
        column = _access_column(res)
        if column:
            row[column] += 1
    return sorted(
        (
            (country, c["total"], c["open"], c["embargo"], c["closed"], c["other"])
            for country, c in groups.items()
        ),
        key=lambda r: (-r[1], r[0]),
    )


def ref_oa_by_org_year(entities, relations):
    groups: dict = {}
    for org, res in _affiliation_join(entities, relations):
        name = org.legal_short_name if org.legal_short_name is not None else org.legal_name
        year = res.publication_date.year if res.publication_date else None
        row = groups.setdefault((name, year), Counter())
        row["total"] += 1
        column = _access_column(res)
        if column:
            row[column] += 1
    return sorted(
        (
            (name, year, c["total"], c["open"], c["embargo"], c["closed"], c["other"])
            for (name, year), c in groups.items()
        ),
        key=lambda r: (_null_first(r[0]), -r[2], _null_first(r[1])),
    )


def _country_project(entities, relations):
    orgs = [e for e in entities if isinstance(e, Organization)]
    pairs = []
    for rel in relations:
        if rel.rel_name != "isParticipant":
            continue
        for org in orgs:
            if org.id == rel.source and org.country_code is not None:
                pairs.append((org.country_code, rel.target))
    return pairs


def ref_co_participation(entities, relations, mode: str):
    country_project = _country_project(entities, relations)
    weights = Counter()
    if mode == "paper-compat":
        for l_country, l_id in country_project:
            for r_country, r_id in country_project:
                if l_id == r_id and l_country <= r_country:
                    weights[l_country, r_country] += 1
    else:
        projects = sorted({pid for _, pid in country_project})
        for project in projects:
            countries = {c for c, pid in country_project if pid == project}
            for a in countries:
                for b in countries:
                    if a < b:
                        weights[a, b] += 1
    return sorted(((a, b, w) for (a, b), w in weights.items()), key=lambda e: (-e[2], e[0], e[1]))
