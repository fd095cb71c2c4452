"""Command-line front door.

Three subcommands: ``build-matrix`` turns a citation edge list into the
persisted similarity matrix, ``report`` computes the full report bundle
for a corpus, and ``serve`` starts the what-if HTTP service. All commands
are deterministic given their inputs and the seed; the seed defaults to a
fixed constant rather than the clock so casual runs reproduce.
"""

from __future__ import annotations

import argparse
import logging
import socket
import sys
from pathlib import Path

from . import __version__
from .analysis import summary_line, write_report_bundle
from .errors import PanelfitError
from .pipeline import (
    DEFAULT_SEED,
    build_manifest,
    load_dataset,
    run_report,
)
from .resample import BootstrapConfig, write_histogram
from .simgraph import (
    JournalIndex,
    build_citation_matrix,
    cosine_similarity,
    persist_matrix,
    read_edge_file,
)

log = logging.getLogger("panelfit")

EXIT_OK = 0
EXIT_ERROR = 2


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="panelfit",
        description="Cognitive distance between evaluation panels and research groups.",
    )
    parser.add_argument("--version", action="version", version=f"panelfit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    build = sub.add_parser("build-matrix", help="build and persist the similarity matrix")
    build.add_argument("--edges", required=True, help="citation edge list file")
    build.add_argument("--aliases", help="journal alias rules file")
    build.add_argument("--out", required=True, help="output matrix container path")
    build.add_argument("--precision", choices=("f32", "f64"), default="f32")
    build.add_argument("--drop-diagonal", action="store_true",
                       help="zero self-citation cells before scoring (sensitivity check)")

    report = sub.add_parser("report", help="compute distance tables and write a bundle")
    _add_corpus_args(report)
    report.add_argument("--method", choices=("barycenter", "sapv", "both"), default="both")
    report.add_argument("--replications", type=int, default=1000)
    report.add_argument("--confidence", type=float, default=0.95)
    report.add_argument("--seed", type=int, default=DEFAULT_SEED)
    report.add_argument("--no-bootstrap", action="store_true",
                        help="skip confidence intervals (distances only)")
    report.add_argument("--histograms", action="store_true",
                        help="also export per-pair bootstrap distance histograms")
    report.add_argument("--out", required=True, help="report bundle directory")

    serve = sub.add_parser("serve", help="serve the what-if HTTP API")
    _add_corpus_args(serve)
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--seed", type=int, default=DEFAULT_SEED)
    serve.add_argument("--replications", type=int, default=1000)
    serve.add_argument("--confidence", type=float, default=0.95)
    return parser


def _add_corpus_args(cmd: argparse.ArgumentParser) -> None:
    cmd.add_argument("--pubs", required=True, help="publications file")
    cmd.add_argument("--entities", required=True, help="entities file")
    cmd.add_argument("--aliases", help="journal alias rules file")
    cmd.add_argument("--matrix", required=True, help="persisted similarity matrix")
    cmd.add_argument("--map", dest="map_path", help="journal map coordinates file")


def cmd_build_matrix(args: argparse.Namespace) -> int:
    from .corpus import Removed, apply_rules, load_alias_rules

    rules = load_alias_rules(args.aliases) if args.aliases else []
    edges = list(read_edge_file(args.edges))
    titles = []
    for citing, cited, _ in edges:
        for title in (citing, cited):
            final = apply_rules(title, rules)
            if not isinstance(final, Removed):
                titles.append(final)
    index = JournalIndex.from_titles(titles)
    cm = build_citation_matrix(edges, index, rules=rules)
    sim = cosine_similarity(cm, drop_diagonal=args.drop_diagonal)
    persist_matrix(sim, args.out, precision=args.precision)
    print(f"N={sim.n}")
    print(f"grand_total={cm.grand_total}")
    print(f"wrote {args.out}")
    return EXIT_OK


def _methods(flag: str) -> tuple[str, ...]:
    return ("barycenter", "sapv") if flag == "both" else (flag,)


def cmd_report(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.pubs, args.entities, args.matrix,
                           aliases_path=args.aliases, map_path=args.map_path)
    methods = _methods(args.method)
    cfg = None if args.no_bootstrap else BootstrapConfig(
        replications=args.replications, confidence=args.confidence, seed=args.seed
    )
    outputs = run_report(dataset, methods, cfg)

    manifest = build_manifest(
        {"publications": args.pubs, "entities": args.entities,
         "aliases": args.aliases, "matrix": args.matrix, "map": args.map_path},
        cfg, methods,
    )
    out = write_report_bundle(
        args.out,
        tables=outputs.tables,
        summaries=outputs.summaries,
        overlaps=outputs.overlaps,
        comparison=outputs.comparison,
        overlay=outputs.overlay,
        manifest=manifest,
        labels=dataset.labels(),
    )
    if args.histograms and cfg is not None:
        _write_histograms(dataset, methods, cfg, out)

    for warning in dataset.load_report.warnings:
        log.warning(warning)
    for method in methods:
        print(f"{method}: {summary_line(outputs.summaries[method])}")
    print(f"report bundle written to {out}")
    return EXIT_OK


def _write_histograms(dataset, methods, cfg, out: Path) -> None:
    from .resample import bootstrap_distance_ci

    hist_dir = out / "histograms"
    study = dataset.study
    for method in methods:
        mdir = hist_dir / method
        mdir.mkdir(parents=True, exist_ok=True)
        for row in study.row_ids:
            for col in study.column_ids:
                boot = bootstrap_distance_ci(
                    study.profiles[row], study.profiles[col], method, cfg,
                    matrix=dataset.matrix, layout=dataset.layout,
                )
                write_histogram(mdir / f"{row}__{col}.csv", boot.samples)


def _port_available(host: str, port: int) -> bool:
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as probe:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            probe.bind((host, port))
        except OSError:
            return False
    return True


def cmd_serve(args: argparse.Namespace) -> int:
    dataset = load_dataset(args.pubs, args.entities, args.matrix,
                           aliases_path=args.aliases, map_path=args.map_path)
    if not _port_available(args.host, args.port):
        print(f"error: port {args.port} is already in use", file=sys.stderr)
        return EXIT_ERROR

    import uvicorn

    from .service import create_app

    cfg = BootstrapConfig(replications=args.replications,
                          confidence=args.confidence, seed=args.seed)
    app = create_app(dataset, cfg)
    print(f"serving on http://{args.host}:{args.port}/v1 "
          f"(entities: {len(dataset.entities)}, N={dataset.matrix.n})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = _parser().parse_args(argv)
    try:
        if args.command == "build-matrix":
            return cmd_build_matrix(args)
        if args.command == "report":
            return cmd_report(args)
        if args.command == "serve":
            return cmd_serve(args)
    except PanelfitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    raise AssertionError("unreachable")


if __name__ == "__main__":
    sys.exit(main())
