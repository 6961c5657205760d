"""Programmatic access: analyze a module by analysis name or descriptor."""

from __future__ import annotations

import os
from pathlib import Path
from typing import Any, Sequence

from cass.analyses import REGISTRY
from cass.framework import Analysis, ProgInfo, Registry
from cass.modules import CacheEntry, default_cache_dir, delete_cache, prog_info, resolve
from cass.scheduler import EventLog, PoolConfig, run_master


def search_path_from_env(default: Sequence[str | Path] = (".",)) -> list[Path]:
    env = os.environ.get("CASS_PATH")
    if env:
        return [Path(p) for p in env.split(os.pathsep) if p]
    return [Path(p) for p in default]


class Engine:
    """Analysis engine shared by the batch CLI and the server.

    Results persist in ``cache_dir`` between calls; ``cache_dir=False``
    turns persistence off.
    """

    def __init__(
        self,
        search_path: Sequence[str | Path] | None = None,
        cache_dir: str | Path | None | bool = None,
        pool: PoolConfig = PoolConfig(),
        registry: Registry = REGISTRY,
        events: EventLog | None = None,
    ) -> None:
        self.search_path = [Path(p) for p in search_path] if search_path else search_path_from_env()
        if cache_dir is None:
            cache_dir = default_cache_dir(self.search_path)
        self.cache_dir: Path | None = None if cache_dir is False else Path(cache_dir)
        self.pool = pool
        self.registry = registry
        self.events = events if events is not None else EventLog()

    def analysis(self, name: str) -> Analysis:
        return self.registry.get(name)

    def delete_cache(self) -> None:
        if self.cache_dir is not None:
            delete_cache(self.cache_dir)

    def run(self, analysis: Analysis | str, module: str) -> dict[str, CacheEntry]:
        if isinstance(analysis, str):
            analysis = self.analysis(analysis)
        return run_master(analysis, module, self.pool, self.search_path, self.cache_dir, self.events)

    def analyze_generic(self, analysis: Analysis | str, module: str) -> ProgInfo:
        """Analysis information for ``module`` and its direct imports.

        Raises :class:`cass.errors.CassError` when the module cannot be
        loaded or analyzed.
        """
        if isinstance(analysis, str):
            analysis = self.analysis(analysis)
        graph = resolve(module, self.search_path)
        entries = run_master(analysis, module, self.pool, self.search_path, self.cache_dir, self.events, graph)
        return prog_info(analysis, graph.modules[module], entries)

    def analyze_module(self, analysis_name: str, module: str) -> ProgInfo:
        """Like :meth:`analyze_generic`, with every value rendered by the show function."""
        analysis = self.analysis(analysis_name)
        info = self.analyze_generic(analysis, module)
        return ProgInfo(
            {q: analysis.show(v) for q, v in info.local.items()},
            {q: analysis.show(v) for q, v in info.imported.items()},
        )

    def local_results(self, analysis: Analysis, module: str) -> list[tuple[Any, Any]]:
        """Sorted ``(qname, value)`` pairs for the entities defined in ``module``."""
        info = self.analyze_generic(analysis, module)
        return sorted(info.local.items())


def analyze_generic(analysis: Analysis | str, module: str, **engine_opts: Any) -> ProgInfo:
    return Engine(**engine_opts).analyze_generic(analysis, module)


def analyze_module(analysis_name: str, module: str, **engine_opts: Any) -> ProgInfo:
    return Engine(**engine_opts).analyze_module(analysis_name, module)
