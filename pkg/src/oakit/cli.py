"""Command-line entry point: ``oakit ingest|subset|query|export|stats``.

Data goes to stdout (or ``--out``), diagnostics to stderr. Usage errors and
missing inputs exit with status 2, other failures with 1.

Any option may also come from an INI config file (``--config``): keys in an
``[oakit]`` section apply to every command, keys in a section named after the
command apply to that command only. Command-line flags win over the file.
The store path defaults to ``$OAKIT_STORE``.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys
from datetime import date
from pathlib import Path
from typing import Optional, Sequence

from . import export, metrics
from .ingest import build_store, stats
from .persist import StoreFormatError, load_store, save_store
from .store import GraphStore
from .subset import DateWindow, extract_subset, write_subset

logger = logging.getLogger("oakit")

STORE_ENV = "OAKIT_STORE"

QUERIES = ("citation-counts", "access-by-country", "oa-by-org-year", "co-participation")
NETWORK_FORMATS = ("pajek", "graphml", "edgelist")

_BOOL_OPTIONS = {"paper_compat", "normalize", "verbose"}
_KEY_ALIASES = {"from": "start", "to": "end"}


class UsageError(Exception):
    pass


def _date(text: str) -> date:
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD, got {text!r}") from None


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _common_options(top_level: bool) -> argparse.ArgumentParser:
    # Subcommands repeat the global options; their defaults are suppressed so
    # they never overwrite a value given before the subcommand name.
    def default(value: object) -> object:
        return value if top_level else argparse.SUPPRESS

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--config", type=Path, default=default(None), help="INI file with default option values"
    )
    common.add_argument(
        "--threads", type=_positive, default=default(1), help="worker cap (default 1)"
    )
    common.add_argument("-v", "--verbose", action="store_true", default=default(False))
    return common


def build_parser() -> tuple[argparse.ArgumentParser, dict[str, argparse.ArgumentParser]]:
    common = _common_options(top_level=False)
    parser = argparse.ArgumentParser(
        prog="oakit",
        description="Scholarly graph dump toolkit",
        parents=[_common_options(top_level=True)],
    )
    sub = parser.add_subparsers(dest="command", required=True)
    commands: dict[str, argparse.ArgumentParser] = {}

    def store_arg(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--store",
            type=Path,
            default=os.environ.get(STORE_ENV),
            help=f"persisted store file (default ${STORE_ENV})",
        )

    p = sub.add_parser("ingest", parents=[common], help="build a store from a dump directory")
    p.add_argument("--input", type=Path, help="dump directory")
    store_arg(p)
    p.add_argument("--report", type=Path, help="also write the ingest report here")
    commands["ingest"] = p

    p = sub.add_parser("subset", parents=[common], help="extract a date-window subset")
    store_arg(p)
    p.add_argument("--from", dest="start", type=_date, help="first publication date (inclusive)")
    p.add_argument("--to", dest="end", type=_date, help="last publication date (inclusive)")
    p.add_argument("--out", type=Path, help="output dump directory")
    p.add_argument("--store-out", type=Path, help="also persist the subset as a store")
    commands["subset"] = p

    p = sub.add_parser("query", parents=[common], help="run an indicator query")
    store_arg(p)
    p.add_argument("query", choices=QUERIES)
    p.add_argument("--paper-compat", action="store_true", help="bag self-join co-participation")
    p.add_argument("--focus", metavar="CC", help="keep co-participation edges touching CC")
    p.add_argument("--normalize", action="store_true", help="add normalized_weight column")
    p.add_argument("--limit", type=_non_negative, help="keep the first N rows")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", type=Path, help="write here instead of stdout")
    commands["query"] = p

    p = sub.add_parser("export", parents=[common], help="export the co-participation network")
    store_arg(p)
    p.add_argument("what", choices=("network",))
    p.add_argument("--format", choices=NETWORK_FORMATS, default="pajek")
    p.add_argument("--paper-compat", action="store_true")
    p.add_argument("--normalize", action="store_true", help="write weights scaled to max 1.0")
    p.add_argument("--focus", metavar="CC")
    p.add_argument("--out", type=Path)
    commands["export"] = p

    p = sub.add_parser("stats", parents=[common], help="entity and relation counts")
    store_arg(p)
    commands["stats"] = p

    return parser, commands


def _config_defaults(path: Path, command: str) -> dict[str, object]:
    config = configparser.ConfigParser()
    if not config.read(path, encoding="utf-8"):
        raise UsageError(f"cannot read config file {path}")
    values: dict[str, object] = {}
    for section in ("oakit", command):
        if not config.has_section(section):
            continue
        for key in config[section]:
            dest = key.replace("-", "_")
            dest = _KEY_ALIASES.get(dest, dest)
            if dest in _BOOL_OPTIONS:
                values[dest] = config[section].getboolean(key)
            else:
                values[dest] = config[section][key]
    return values


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser, commands = build_parser()
    args = parser.parse_args(argv)
    if args.config is not None:
        command_parser = commands[args.command]
        try:
            defaults = _config_defaults(args.config, args.command)
        except UsageError as exc:
            command_parser.error(str(exc))
        known = {a.dest for a in command_parser._actions}
        command_parser.set_defaults(**{k: v for k, v in defaults.items() if k in known})
        args = parser.parse_args(argv)
    _validate(args, commands[args.command])
    return args


def _validate(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    required = {
        "ingest": ("input", "store"),
        "subset": ("store", "start", "end", "out"),
        "query": ("store",),
        "export": ("store", "out"),
        "stats": ("store",),
    }[args.command]
    for dest in required:
        if getattr(args, dest) is None:
            flag = {"start": "--from", "end": "--to"}.get(dest, "--" + dest.replace("_", "-"))
            parser.error(f"{flag} is required")
    if args.command == "subset" and args.start > args.end:
        parser.error(f"--from {args.start} is after --to {args.end}")
    if args.command == "query" and args.query != "co-participation":
        for dest in ("focus", "paper_compat", "normalize"):
            if getattr(args, dest):
                flag = "--" + dest.replace("_", "-")
                parser.error(f"{flag} only applies to the co-participation query")


def _open_store(path: Path) -> GraphStore:
    if not path.is_file():
        raise FileNotFoundError(f"store not found: {path}")
    return load_store(path)


def _emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as sink:
            sink.write(text)


def _network(store: GraphStore, args: argparse.Namespace) -> list[metrics.CoParticipationEdge]:
    mode = "paper-compat" if args.paper_compat else "distinct"
    edges = metrics.co_participation_edges(store, mode)
    if args.focus is not None:
        edges = metrics.focus_country(edges, args.focus)
    if args.normalize and edges:
        edges = metrics.normalize_weights(edges)
    return edges


def cmd_ingest(args: argparse.Namespace) -> int:
    if not args.input.is_dir():
        raise FileNotFoundError(f"input directory not found: {args.input}")
    store, report = build_store(args.input, threads=args.threads)
    save_store(store, args.store)
    text = report.to_json() + "\n"
    if args.report is not None:
        _emit(text, args.report)
    _emit(text, None)
    return 0


def cmd_subset(args: argparse.Namespace) -> int:
    store = _open_store(args.store)
    subset, manifest = extract_subset(store, DateWindow(args.start, args.end))
    write_subset(subset, manifest, args.out)
    if args.store_out is not None:
        save_store(subset, args.store_out)
    _emit(json.dumps(manifest.summary(), indent=2) + "\n", None)
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    store = _open_store(args.store)
    if args.query == "citation-counts":
        table = export.citation_table(metrics.citation_counts(store))
    elif args.query == "access-by-country":
        table = export.country_access_table(metrics.access_breakdown_by_country(store))
    elif args.query == "oa-by-org-year":
        table = export.org_year_access_table(metrics.oa_breakdown_by_org_year(store))
    else:
        table = export.edge_table(_network(store, args), normalized=args.normalize)
    table = table.head(args.limit)
    writer = export.write_csv if args.format == "csv" else export.write_json
    _emit(export.render(writer, table), args.out)
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    store = _open_store(args.store)
    writer = {
        "pajek": export.write_pajek,
        "graphml": export.write_graphml,
        "edgelist": export.write_edge_list,
    }[args.format]
    _emit(export.render(writer, _network(store, args), normalized=args.normalize), args.out)
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    store = _open_store(args.store)
    _emit(json.dumps(stats(store), indent=2) + "\n", None)
    return 0


COMMANDS = {
    "ingest": cmd_ingest,
    "subset": cmd_subset,
    "query": cmd_query,
    "export": cmd_export,
    "stats": cmd_stats,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"oakit: {exc}", file=sys.stderr)
        return 2
    except StoreFormatError as exc:
        print(f"oakit: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"oakit: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
