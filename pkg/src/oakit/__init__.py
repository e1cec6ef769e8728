"""Toolkit for OpenAIRE-Graph-style JSON-lines dumps.

Ingest a dump into an indexed store, cut date-window subsets, compute
citation, open-access and co-participation indicators, and export the
results as CSV/JSON tables or Pajek/GraphML networks.
"""

from .ingest import IngestReport, RecordRejected, build_store, stats
from .metrics import (
    AccessBreakdownRow,
    CitationCount,
    CoParticipationEdge,
    access_breakdown_by_country,
    citation_counts,
    co_participation_edges,
    focus_country,
    normalize_weights,
    oa_breakdown_by_org_year,
)
from .model import (
    AccessClass,
    AccessRight,
    Community,
    Datasource,
    Organization,
    Pid,
    ProductKind,
    Project,
    Relation,
    ResearchProduct,
    classify_access,
    display_name,
)
from .persist import load_store, save_store
from .store import GraphStore
from .subset import DateWindow, extract_subset

__version__ = "0.1.0"
