"""
Master/worker execution of an analysis over a whole application.

The master resolves the import graph, walks the topological order and
hands every module whose imports are finished to a free worker.  Workers
are a fixed pool (threads by default, processes on request) that load the
module, analyze it, store the cache entry and report back.  A module whose
cache entry is still valid completes on the master without a dispatch.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from concurrent.futures import FIRST_COMPLETED, Executor, Future, ProcessPoolExecutor, ThreadPoolExecutor, wait
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Any, Mapping, Sequence

from cass.errors import CassError
from cass.framework import Analysis
from cass.ir import load_module
from cass.modules import (
    CacheEntry,
    ModuleGraph,
    analyze_module,
    cache_lookup,
    cache_store,
    fingerprints,
    resolve,
    topo_order,
)

log = logging.getLogger(__name__)


class WorkerFailure(CassError):
    def __init__(self, module: str, cause: BaseException) -> None:
        super().__init__(f"analysis of module {module} failed: {cause}")
        self.module = module
        self.cause = cause


class Status(str, Enum):
    PENDING = "Pending"
    READY = "Ready"
    RUNNING = "Running"
    DONE = "Done"


@dataclass
class Job:
    module: str
    analysis: str
    path: Path
    fingerprint: int
    status: Status = Status.PENDING


@dataclass(frozen=True)
class PoolConfig:
    workers: int = 1
    backend: str = "thread"  # "thread" | "process"
    # only ever dispatch the head of the topological list
    head_only: bool = False

    def __post_init__(self) -> None:
        if self.workers < 1:
            raise ValueError("at least one worker is required")
        if self.backend not in ("thread", "process"):
            raise ValueError(f"unknown worker backend {self.backend!r}")


class EventLog:
    """Scheduling events, kept in memory and optionally appended to a file as JSON lines."""

    def __init__(self, path: str | Path | None = None) -> None:
        self.events: list[dict[str, Any]] = []
        self._lock = threading.Lock()
        self._fh: IO[str] | None = open(path, "a", encoding="utf-8") if path else None

    def record(self, event: str, module: str, analysis: str, worker: int | None = None) -> None:
        rec = {"ts": time.time(), "event": event, "module": module, "analysis": analysis, "worker": worker}
        with self._lock:
            self.events.append(rec)
            if self._fh is not None:
                self._fh.write(json.dumps(rec) + "\n")
                self._fh.flush()

    def of(self, event: str, analysis: str | None = None) -> list[dict[str, Any]]:
        return [e for e in self.events if e["event"] == event and (analysis is None or e["analysis"] == analysis)]

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None


def worker_step(
    job: Job,
    inputs: Mapping[str, CacheEntry],
    analysis: Analysis | str,
    base_inputs: Mapping[str, CacheEntry] | None = None,
    cache_dir: str | Path | None = None,
) -> CacheEntry:
    """Analyze one module; runs inside a worker.

    ``analysis`` may be a registry name so that the job can cross a process
    boundary.  ``base_inputs`` must hold the base analysis' entries for the
    module and its imports when the analysis is combined.
    """
    if isinstance(analysis, str):
        from cass.analyses import REGISTRY

        analysis = REGISTRY.get(analysis)
    if cache_dir is not None:
        hit = cache_lookup(job.module, analysis.name, job.fingerprint, cache_dir)
        if hit is not None:
            return hit
    module = load_module(job.path)
    entry = analyze_module(analysis, module, inputs, base_inputs)
    if entry.fingerprint != job.fingerprint:
        raise CassError(f"{job.path} changed while the analysis was running")
    if cache_dir is not None:
        cache_store(entry, cache_dir)
    return entry


def _make_pool(cfg: PoolConfig) -> Executor:
    if cfg.backend == "process":
        return ProcessPoolExecutor(max_workers=cfg.workers)
    return ThreadPoolExecutor(max_workers=cfg.workers, thread_name_prefix="cass-worker")


def run_pass(
    analysis: Analysis,
    graph: ModuleGraph,
    pool: Executor,
    cfg: PoolConfig,
    cache_dir: str | Path | None,
    events: EventLog,
    base_results: Mapping[str, CacheEntry] | None = None,
    picklable: bool = False,
) -> dict[str, CacheEntry]:
    """Analyze every module of ``graph`` with ``analysis``; bases must already be done."""
    order = topo_order(graph)
    fps = fingerprints(graph, analysis)
    jobs = {m: Job(m, analysis.name, graph.paths[m], fps[m]) for m in order}
    remaining = list(order)
    results: dict[str, CacheEntry] = {}
    running: dict[Future, tuple[str, int]] = {}
    free = list(range(cfg.workers))
    failure: WorkerFailure | None = None

    def ready(m: str) -> bool:
        return all(i in results for i in graph.edges[m])

    while remaining or running:
        progressed = True
        while progressed and failure is None:
            progressed = False
            candidates = remaining[:1] if cfg.head_only else remaining
            for m in candidates:
                if not ready(m):
                    continue
                job = jobs[m]
                job.status = Status.READY
                if cache_dir is not None:
                    hit = cache_lookup(m, analysis.name, job.fingerprint, cache_dir)
                    if hit is not None:
                        job.status = Status.DONE
                        results[m] = hit
                        remaining.remove(m)
                        events.record("cache_hit", m, analysis.name)
                        progressed = True
                        break
                if not free:
                    break
                free.sort()
                worker = free.pop(0)
                inputs = {i: results[i] for i in graph.edges[m]}
                base_inputs = None
                if base_results is not None:
                    base_inputs = {i: base_results[i] for i in (m, *graph.edges[m])}
                job.status = Status.RUNNING
                events.record("dispatch", m, analysis.name, worker)
                fut = pool.submit(
                    worker_step, job, inputs, analysis.name if picklable else analysis, base_inputs, cache_dir
                )
                running[fut] = (m, worker)
                remaining.remove(m)
                progressed = True
                break
        if not running:
            if failure is not None:
                raise failure
            if remaining:
                # nothing running and nothing ready cannot happen on an acyclic graph
                raise CassError(f"scheduler stalled with pending modules {remaining}")
            break
        finished, _ = wait(list(running), return_when=FIRST_COMPLETED)
        for fut in sorted(finished, key=lambda f: running[f][0]):
            m, worker = running.pop(fut)
            free.append(worker)
            exc = fut.exception()
            if exc is not None:
                log.error("worker %d failed on %s: %s", worker, m, exc)
                if failure is None:
                    failure = WorkerFailure(m, exc)
                    remaining.clear()
                continue
            results[m] = fut.result()
            jobs[m].status = Status.DONE
            events.record("done", m, analysis.name, worker)
    if failure is not None:
        raise failure
    return results


def run_master(
    analysis: Analysis,
    root_module: str,
    cfg: PoolConfig = PoolConfig(),
    search_path: Sequence[str | Path] = (".",),
    cache_dir: str | Path | None = None,
    events: EventLog | None = None,
    graph: ModuleGraph | None = None,
) -> dict[str, CacheEntry]:
    """Analyze ``root_module`` and all of its imports; returns one entry per module.

    Base analyses of a combined analysis run first, each as a complete pass
    over the module graph.  Passing ``cache_dir=None`` disables persistence.
    """
    if graph is None:
        graph = resolve(root_module, search_path)
    events = events if events is not None else EventLog()
    picklable = cfg.backend == "process"
    if picklable:
        from cass.analyses import REGISTRY

        for a in analysis.base_chain():
            if a.name not in REGISTRY or REGISTRY.get(a.name).cache_key() != a.cache_key():
                raise CassError(f"process workers can only run registered analyses, not {a.name}")
    with _make_pool(cfg) as pool:
        base_results: dict[str, CacheEntry] | None = None
        for step in analysis.base_chain():
            base_results = run_pass(
                step, graph, pool, cfg, cache_dir, events,
                base_results if step.base is not None else None,
                picklable,
            )
    assert base_results is not None
    return base_results
