"""Per-module evaluation of an analysis: single pass or worklist fixpoint."""

from __future__ import annotations

import logging
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Sequence

from cass.errors import CassError
from cass.framework import Analysis, Kind, ProgInfo, Target
from cass.ir import Module, QName, called_functions, used_types

log = logging.getLogger(__name__)


class IterationCapExceeded(CassError):
    pass


class _Counter:
    """Process-wide count of transfer-function calls (for cache-hit checks)."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._n = 0

    def add(self, k: int = 1) -> None:
        with self._lock:
            self._n += k

    @property
    def value(self) -> int:
        return self._n


transfer_calls = _Counter()
_MISSING = object()


@dataclass(frozen=True)
class Entity:
    qname: QName
    decl: Any
    deps: tuple[QName, ...] = ()
    external: bool = False
    # enclosing type, constructor analyses only
    owner: Any = None


def entities(analysis: Analysis, module: Module) -> list[Entity]:
    """The local entities of ``module`` an analysis assigns values to, in QName order."""
    out: list[Entity] = []
    if analysis.target is Target.FUNCTION:
        for f in module.functions:
            deps = () if f.is_external else called_functions(f)
            out.append(Entity(f.qname, f, deps, f.is_external))
    elif analysis.target is Target.TYPE:
        for t in module.types:
            out.append(Entity(t.qname, t, used_types(t)))
    else:
        for c, t in module.constructors():
            out.append(Entity(c.qname, c, owner=t))
    out.sort(key=lambda e: e.qname)
    return out


@dataclass(frozen=True)
class DepGraph:
    nodes: tuple[QName, ...]
    edges: Mapping[QName, tuple[QName, ...]]
    reverse: Mapping[QName, tuple[QName, ...]]

    @classmethod
    def build(cls, ents: Iterable[Entity]) -> DepGraph:
        ents = list(ents)
        local = {e.qname for e in ents}
        edges = {e.qname: tuple(d for d in e.deps if d in local) for e in ents}
        rev: dict[QName, set[QName]] = {q: set() for q in edges}
        for q, ds in edges.items():
            for d in ds:
                rev[d].add(q)
        return cls(
            tuple(sorted(local)),
            edges,
            {q: tuple(sorted(s)) for q, s in rev.items()},
        )


@dataclass
class SolverResult:
    values: dict[QName, Any]
    iterations: int = 0
    reached_cap: bool = False
    # referenced non-local entities without an imported value
    missing: list[QName] = field(default_factory=list)


def apply_transfer(
    analysis: Analysis,
    entity: Entity,
    base_info: ProgInfo | None,
    called: list[tuple[QName, Any]] | None = None,
) -> Any:
    """Invoke the transfer function with the argument list its kind expects."""
    if entity.external:
        return analysis.default_for(entity.qname)
    transfer_calls.add()
    fn = analysis.transfer
    if analysis.target is Target.CONSTRUCTOR:
        return fn(entity.decl, entity.owner)
    kind = analysis.kind
    if kind is Kind.SIMPLE:
        return fn(entity.decl)
    if kind is Kind.DEPENDENCY:
        return fn(entity.decl, called)
    if kind is Kind.COMBINED:
        return fn(base_info, entity.decl)
    return fn(base_info, entity.decl, called)


def _need_base(analysis: Analysis, base_info: ProgInfo | None) -> None:
    if analysis.kind.is_combined and base_info is None:
        raise ValueError(f"{analysis.name} is combined and needs the base analysis information")


def run_simple(analysis: Analysis, module: Module, base_info: ProgInfo | None = None) -> dict[QName, Any]:
    """One transfer call per local entity, no iteration."""
    if analysis.kind.has_dependencies:
        raise ValueError(f"{analysis.name} is a dependency analysis; use solve()")
    _need_base(analysis, base_info)
    return {e.qname: apply_transfer(analysis, e, base_info) for e in entities(analysis, module)}


def solve(
    analysis: Analysis,
    module: Module,
    imported: ProgInfo | Mapping[QName, Any],
    base_info: ProgInfo | None = None,
    *,
    order: Sequence[QName] | None = None,
    trace: Callable[[QName, Any, Any], None] | None = None,
    raise_on_cap: bool = True,
) -> SolverResult:
    """Least fixpoint of a dependency analysis over the local entities of ``module``.

    All local entities start at the analysis' bottom value; values of
    imported entities are constants.  An entity is re-evaluated whenever one
    of its direct dependencies changes.  ``order`` fixes the initial worklist
    order (default: QName order) and ``trace`` is called as
    ``trace(qname, old, new)`` on every update.
    """
    if not analysis.kind.has_dependencies:
        raise ValueError(f"{analysis.name} has no dependencies; use run_simple()")
    _need_base(analysis, base_info)
    imported_values = imported.imported if isinstance(imported, ProgInfo) else imported

    ents = {e.qname: e for e in entities(analysis, module)}
    graph = DepGraph.build(ents.values())
    values: dict[QName, Any] = {}
    for q, e in ents.items():
        values[q] = analysis.default_for(q) if e.external else analysis.start_value(e.decl)

    missing: list[QName] = []
    constants: dict[QName, Any] = {}
    for e in ents.values():
        for d in e.deps:
            if d in ents or d in constants:
                continue
            v = imported_values.get(d, _MISSING)
            if v is _MISSING:
                v = analysis.default_for(d)
                missing.append(d)
            constants[d] = v
    if missing:
        log.warning(
            "%s/%s: no imported values for %s; using external defaults",
            analysis.name, module.name, ", ".join(map(str, sorted(missing))),
        )

    worklist: deque[QName] = deque(
        q for q in (order if order is not None else graph.nodes) if not ents[q].external
    )
    queued = set(worklist)
    cap = 10_000 * len(graph.nodes)
    iterations = 0
    while worklist:
        if iterations >= cap:
            if raise_on_cap:
                raise IterationCapExceeded(
                    f"{analysis.name}/{module.name}: no fixpoint after {iterations} steps; "
                    "transfer function not monotone or domain of infinite height"
                )
            return SolverResult(values, iterations, True, sorted(missing))
        q = worklist.popleft()
        queued.discard(q)
        iterations += 1
        e = ents[q]
        called = [(d, values[d] if d in values else constants[d]) for d in e.deps]
        new = apply_transfer(analysis, e, base_info, called)
        if new != values[q]:
            if trace is not None:
                trace(q, values[q], new)
            values[q] = new
            for dependent in graph.reverse[q]:
                if dependent not in queued and not ents[dependent].external:
                    worklist.append(dependent)
                    queued.add(dependent)
    return SolverResult(values, iterations, False, sorted(missing))


def evaluate(
    analysis: Analysis,
    module: Module,
    imported: ProgInfo | Mapping[QName, Any] | None = None,
    base_info: ProgInfo | None = None,
) -> dict[QName, Any]:
    """Run ``analysis`` on ``module`` with whichever strategy its kind needs."""
    if analysis.kind.has_dependencies:
        return solve(analysis, module, imported or {}, base_info).values
    return run_simple(analysis, module, base_info)
