"""Command line entry point: batch analysis, registry listing and server mode."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from cass.analyses import REGISTRY
from cass.api import Engine, search_path_from_env
from cass.errors import CassError
from cass.output import OutputFormat, render
from cass.scheduler import EventLog, PoolConfig

EXIT_OK, EXIT_USAGE, EXIT_ANALYSIS = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cass", description="Analyze FlatCurry modules with a registered analysis.")
    p.add_argument("analysis", nargs="?", help="registered analysis name (see --list)")
    p.add_argument("module", nargs="?", help="module to analyze, e.g. Demo")
    p.add_argument("--format", default="plain", choices=[f.value for f in OutputFormat])
    p.add_argument("--workers", type=int, default=1, help="number of analysis workers")
    p.add_argument("--backend", default="thread", choices=["thread", "process"])
    p.add_argument("--path", help="comma separated module search path (default: $CASS_PATH or .)")
    p.add_argument("--cache-dir", help="result cache directory (default: .cass_cache beside the corpus)")
    p.add_argument("--no-cache", action="store_true", help="do not read or write persistent results")
    p.add_argument("--delete-cache", action="store_true", help="remove all cached results first")
    p.add_argument("--list", action="store_true", help="print the registered analyses and exit")
    p.add_argument("--server", type=int, metavar="PORT", help="serve the line protocol on PORT (0: any)")
    p.add_argument("--event-log", metavar="FILE", help="append scheduling events to FILE as JSON lines")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )

    if args.list:
        for name in REGISTRY.names():
            print(name)
        return EXIT_OK
    if args.workers < 1:
        parser.error("--workers must be at least 1")

    path = [Path(p) for p in args.path.split(",") if p] if args.path else search_path_from_env()
    events = EventLog(args.event_log)
    engine = Engine(
        path,
        False if args.no_cache else args.cache_dir,
        PoolConfig(args.workers, args.backend),
        REGISTRY,
        events,
    )
    try:
        if args.delete_cache:
            engine.delete_cache()
        if args.server is not None:
            from cass.server import AnalysisServer

            srv = AnalysisServer(engine, port=args.server)
            srv.serve(ready=lambda port: print(f"cass server listening on port {port}", flush=True))
            return EXIT_OK
        if args.analysis is None or args.module is None:
            if args.delete_cache:
                return EXIT_OK
            parser.error("an analysis name and a module name are required")
        if args.analysis not in REGISTRY:
            parser.error(f"unknown analysis {args.analysis!r}; available: {', '.join(REGISTRY.names())}")

        analysis = REGISTRY.get(args.analysis)
        try:
            results = engine.local_results(analysis, args.module)
        except CassError as exc:
            print(f"cass: {exc}", file=sys.stderr)
            return EXIT_ANALYSIS
        for line in render(analysis, args.module, results, OutputFormat(args.format)):
            print(line)
        return EXIT_OK
    finally:
        events.close()


if __name__ == "__main__":
    sys.exit(main())
