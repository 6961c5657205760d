"""
Module graph resolution, fingerprints, per-module analysis and the
persistent result cache.

Cache layout: ``<cache_dir>/<module>/<analysis>.json``.  An entry is valid
only while its fingerprint matches; the fingerprint covers the module's
bytes, the analysis (and base analysis) versions, and recursively the
fingerprints of all imports.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import logging
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

from cass.errors import CassError
from cass.fixpoint import entities, run_simple, solve
from cass.framework import Analysis, ProgInfo
from cass.ir import Module, QName, Visibility, load_module, referenced_names

log = logging.getLogger(__name__)

SUFFIX = ".fcy.json"


class ModuleNotFound(CassError):
    def __init__(self, name: str, searched: Sequence[Path]) -> None:
        dirs = ", ".join(str(d) for d in searched) or "<empty search path>"
        super().__init__(f"module {name!r} not found in: {dirs}")
        self.name = name
        self.searched = list(searched)


class ImportCycle(CassError):
    def __init__(self, cycle: list[str]) -> None:
        super().__init__("import cycle: " + " -> ".join(cycle))
        self.cycle = cycle


class UnresolvedReference(CassError):
    pass


class CorruptCache(CassError):
    pass


# -- module graph -----------------------------------------------------------------


@dataclass(frozen=True)
class ModuleGraph:
    nodes: frozenset[str]
    edges: Mapping[str, tuple[str, ...]]
    paths: Mapping[str, Path]
    modules: Mapping[str, Module] = field(default_factory=dict, compare=False, repr=False)

    def imports(self, name: str) -> tuple[str, ...]:
        return self.edges[name]


def find_module(name: str, search_path: Sequence[str | Path]) -> Path:
    dirs = [Path(d) for d in search_path]
    for d in dirs:
        candidate = d / f"{name}{SUFFIX}"
        if candidate.is_file():
            return candidate
    raise ModuleNotFound(name, dirs)


def resolve(module_name: str, search_path: Sequence[str | Path]) -> ModuleGraph:
    """Load ``module_name`` and everything it imports, transitively.

    Every module is validated and link-checked against its imports.
    """
    paths: dict[str, Path] = {}
    modules: dict[str, Module] = {}
    done: set[str] = set()
    stack: list[str] = []

    def visit(name: str) -> None:
        if name in done:
            return
        if name in stack:
            raise ImportCycle(stack[stack.index(name):] + [name])
        path = find_module(name, search_path)
        module = load_module(path)
        if module.name != name:
            raise CassError(f"{path} declares module {module.name!r}, expected {name!r}")
        paths[name] = path
        modules[name] = module
        stack.append(name)
        for imp in module.imports:
            visit(imp)
        stack.pop()
        done.add(name)

    visit(module_name)
    for m in modules.values():
        check_links(m, modules)
    return ModuleGraph(
        frozenset(modules),
        {n: tuple(sorted(set(m.imports))) for n, m in modules.items()},
        paths,
        modules,
    )


def _declared(m: Module) -> dict[str, dict[QName, Visibility]]:
    return {
        "func": {f.qname: f.visibility for f in m.functions},
        "cons": {c.qname: c.visibility for c, _ in m.constructors()},
        "type": {t.qname: t.visibility for t in m.types},
    }


def check_links(module: Module, modules: Mapping[str, Module]) -> None:
    """Every referenced name must be declared locally or exported by a direct import."""
    tables = {n: _declared(modules[n]) for n in {module.name, *module.imports} if n in modules}
    problems = []
    for kind, user, q in referenced_names(module):
        if q.module != module.name and q.module not in module.imports:
            problems.append(f"{user}: {q} refers to module {q.module!r}, which is not imported")
            continue
        vis = tables[q.module][kind].get(q)
        if vis is None:
            problems.append(f"{user}: unknown {kind} {q}")
        elif q.module != module.name and vis is not Visibility.PUBLIC:
            problems.append(f"{user}: {q} is private to {q.module}")
    if problems:
        raise UnresolvedReference(f"module {module.name}: " + "; ".join(sorted(set(problems))))


def topo_order(graph: ModuleGraph) -> list[str]:
    """Imports before importers; ties broken by module name."""
    pending = {n: len(graph.edges[n]) for n in graph.nodes}
    users: dict[str, list[str]] = {n: [] for n in graph.nodes}
    for n, imps in graph.edges.items():
        for i in imps:
            users[i].append(n)
    ready = [n for n, k in pending.items() if k == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        n = heapq.heappop(ready)
        order.append(n)
        for u in users[n]:
            pending[u] -= 1
            if pending[u] == 0:
                heapq.heappush(ready, u)
    if len(order) != len(graph.nodes):
        raise ImportCycle(sorted(set(graph.nodes) - set(order)))
    return order


# -- fingerprints --------------------------------------------------------------------


def fingerprint(source_hash: int, analysis_key: str, import_fps: Mapping[str, int]) -> int:
    parts = [f"{source_hash:016x}", analysis_key]
    parts += [f"{name}={fp:016x}" for name, fp in sorted(import_fps.items())]
    digest = hashlib.blake2b("|".join(parts).encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def fingerprints(
    graph: ModuleGraph, analysis: Analysis, hashes: Mapping[str, int] | None = None
) -> dict[str, int]:
    """Fingerprint of every module in ``graph`` for ``analysis``.

    ``hashes`` overrides the source hashes recorded at load time.
    """
    key = analysis.cache_key()
    out: dict[str, int] = {}
    for name in topo_order(graph):
        h = hashes[name] if hashes is not None else graph.modules[name].source_hash
        out[name] = fingerprint(h, key, {i: out[i] for i in graph.edges[name]})
    return out


# -- cache entries -------------------------------------------------------------------


@dataclass(frozen=True)
class CacheEntry:
    module: str
    analysis: str
    version: int
    fingerprint: int
    # entity name (unqualified) -> serialized abstract value
    public_values: Mapping[str, Any]
    all_values: Mapping[str, Any]

    def to_json(self) -> dict:
        return {
            "module": self.module,
            "analysis": self.analysis,
            "version": self.version,
            "fingerprint": f"{self.fingerprint:016x}",
            "public": dict(self.public_values),
            "all": dict(self.all_values),
        }

    def dumps(self) -> str:
        """Canonical serialization; equal entries give equal strings."""
        return json.dumps(self.to_json(), sort_keys=True, ensure_ascii=False, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, obj: Any) -> CacheEntry:
        try:
            entry = cls(
                obj["module"],
                obj["analysis"],
                int(obj["version"]),
                int(obj["fingerprint"], 16),
                dict(obj["public"]),
                dict(obj["all"]),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptCache(f"malformed cache entry: {exc}") from None
        if not set(entry.public_values) <= set(entry.all_values):
            raise CorruptCache("public values are not a subset of all values")
        return entry

    def values(self, analysis: Analysis, public_only: bool = False) -> dict[QName, Any]:
        raw = self.public_values if public_only else self.all_values
        return {QName(self.module, n): analysis.decode(v) for n, v in raw.items()}


def imported_values(analysis: Analysis, module: Module, entries: Mapping[str, CacheEntry]) -> dict[QName, Any]:
    """Decoded public values of the direct imports of ``module``."""
    out: dict[QName, Any] = {}
    for imp in module.imports:
        try:
            entry = entries[imp]
        except KeyError:
            raise CassError(f"{analysis.name}/{module.name}: no results for import {imp}") from None
        out.update(entry.values(analysis, public_only=True))
    return out


def prog_info(analysis: Analysis, module: Module, entries: Mapping[str, CacheEntry]) -> ProgInfo:
    """ProgInfo for ``module`` from the entries of the module itself and its imports."""
    try:
        own = entries[module.name]
    except KeyError:
        raise CassError(f"no {analysis.name} results for {module.name}") from None
    return ProgInfo(own.values(analysis), imported_values(analysis, module, entries))


def _is_public(analysis: Analysis, module: Module) -> dict[QName, bool]:
    out = {}
    for e in entities(analysis, module):
        out[e.qname] = e.decl.visibility is Visibility.PUBLIC
    return out


def analyze_module(
    analysis: Analysis,
    module: Module,
    import_infos: Mapping[str, CacheEntry],
    base_infos: Mapping[str, CacheEntry] | None = None,
) -> CacheEntry:
    """Analyze one module given the results for its direct imports.

    For combined analyses ``base_infos`` must hold the base analysis' entries
    for the module itself and its direct imports.
    """
    base_info = None
    if analysis.base is not None:
        if base_infos is None:
            raise CassError(f"{analysis.name}/{module.name}: base analysis {analysis.base.name} has not run")
        base_info = prog_info(analysis.base, module, base_infos)
    if analysis.kind.has_dependencies:
        imported = imported_values(analysis, module, import_infos)
        values = solve(analysis, module, imported, base_info).values
    else:
        # a simple analysis does not look at imported entities
        values = run_simple(analysis, module, base_info)

    public = _is_public(analysis, module)
    all_values = {q.name: analysis.encode(v) for q, v in sorted(values.items())}
    public_values = {q.name: analysis.encode(v) for q, v in sorted(values.items()) if public[q]}
    fp = fingerprint(
        module.source_hash,
        analysis.cache_key(),
        {i: import_infos[i].fingerprint for i in module.imports},
    )
    return CacheEntry(module.name, analysis.name, analysis.version, fp, public_values, all_values)


# -- persistence ------------------------------------------------------------------------


def cache_path(cache_dir: str | Path, module: str, analysis: str) -> Path:
    return Path(cache_dir) / module / f"{analysis}.json"


def cache_lookup(module: str, analysis: str, expected: int, cache_dir: str | Path) -> CacheEntry | None:
    path = cache_path(cache_dir, module, analysis)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        return None
    except (OSError, UnicodeDecodeError) as exc:
        log.warning("ignoring unreadable cache file %s: %s", path, exc)
        return None
    try:
        entry = CacheEntry.from_json(json.loads(text))
    except (json.JSONDecodeError, CorruptCache) as exc:
        log.warning("ignoring corrupt cache file %s: %s", path, exc)
        return None
    if entry.module != module or entry.analysis != analysis:
        log.warning("ignoring cache file %s: it belongs to %s/%s", path, entry.module, entry.analysis)
        return None
    if entry.fingerprint != expected:
        return None
    return entry


def cache_store(entry: CacheEntry, cache_dir: str | Path) -> Path:
    """Atomically write ``entry`` (temp file + rename)."""
    path = cache_path(cache_dir, entry.module, entry.analysis)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{entry.analysis}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(entry.dumps())
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return path


def delete_cache(cache_dir: str | Path) -> None:
    shutil.rmtree(cache_dir, ignore_errors=True)


def default_cache_dir(search_path: Sequence[str | Path]) -> Path:
    env = os.environ.get("CASS_CACHE_DIR")
    if env:
        return Path(env)
    first = Path(search_path[0]) if search_path else Path.cwd()
    return first / ".cass_cache"
