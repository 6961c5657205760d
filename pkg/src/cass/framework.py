"""
Analysis descriptors, analysis constructors, ProgInfo and the registry.

An analysis author writes a transfer function for one entity (a function,
a type or a data constructor) and wraps it with one of the constructors
below.  The driver code in :mod:`cass.fixpoint`, :mod:`cass.modules` and
:mod:`cass.scheduler` takes care of fixpoints, imports and caching.

Transfer signatures by kind (``E`` is ``FuncDecl`` or ``TypeDecl``)::

    Simple               E -> a
    Dependency           E -> [(QName, a)] -> a
    Combined             ProgInfo b -> E -> a
    CombinedDependency   ProgInfo b -> E -> [(QName, a)] -> a
    Constructor          ConsDecl -> TypeDecl -> a
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Any, Callable, Iterable, Iterator, Mapping

from cass.errors import CassError
from cass.ir import QName


class UnknownAnalysis(CassError):
    def __init__(self, name: str, known: Iterable[str] = ()) -> None:
        known = list(known)
        msg = f"unknown analysis {name!r}"
        if known:
            msg += "; available: " + ", ".join(known)
        super().__init__(msg)
        self.name = name
        self.known = known


class UnknownBaseAnalysis(CassError):
    pass


class RegistryError(CassError):
    pass


class Target(str, Enum):
    FUNCTION = "Function"
    TYPE = "Type"
    CONSTRUCTOR = "Constructor"


class Kind(str, Enum):
    SIMPLE = "Simple"
    DEPENDENCY = "Dependency"
    COMBINED = "Combined"
    COMBINED_DEPENDENCY = "CombinedDependency"

    @property
    def has_dependencies(self) -> bool:
        return self in (Kind.DEPENDENCY, Kind.COMBINED_DEPENDENCY)

    @property
    def is_combined(self) -> bool:
        return self in (Kind.COMBINED, Kind.COMBINED_DEPENDENCY)


def _identity(x: Any) -> Any:
    return x


@dataclass(frozen=True, eq=False)
class Analysis:
    name: str
    target: Target
    kind: Kind
    transfer: Callable[..., Any]
    # start value of the fixpoint; may be a callable taking the entity when
    # the bottom element depends on it (e.g. the arity of a function)
    bottom: Any = None
    base: Analysis | None = None
    external_default: Any = None
    show: Callable[[Any], str] = str
    encode: Callable[[Any], Any] = _identity
    decode: Callable[[Any], Any] = _identity
    # partial order of the domain; only used by tests and the tracing solver
    leq: Callable[[Any, Any], bool] | None = None
    # serialized per-entity overrides for external entities, keyed "Module.name"
    externals: Mapping[str, Any] = field(default_factory=dict)
    version: int = 1

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("analysis name must be nonempty")
        if self.kind.is_combined != (self.base is not None):
            raise ValueError(f"{self.name}: base analysis required iff the kind is combined")
        if self.target is Target.CONSTRUCTOR and self.kind is not Kind.SIMPLE:
            raise ValueError(f"{self.name}: constructor analyses are always simple")
        if self.version < 1:
            raise ValueError(f"{self.name}: version must be >= 1")

    def __repr__(self) -> str:
        return f"<Analysis {self.name} {self.target.value}/{self.kind.value} v{self.version}>"

    def start_value(self, entity: Any) -> Any:
        return self.bottom(entity) if callable(self.bottom) else self.bottom

    def default_for(self, qname: QName) -> Any:
        """Abstract value of an external entity: manifest entry, else the analysis default."""
        raw = self.externals.get(str(qname))
        if raw is not None:
            return self.decode(raw)
        return self.external_default

    def base_chain(self) -> list[Analysis]:
        """This analysis preceded by its transitive bases, innermost base first."""
        chain: list[Analysis] = []
        a: Analysis | None = self
        while a is not None:
            if any(a.name == seen.name for seen in chain):
                raise RegistryError(f"cyclic base analyses through {a.name}")
            chain.append(a)
            a = a.base
        return chain[::-1]

    def cache_key(self) -> str:
        """Name and version of this analysis and all of its bases."""
        return "<".join(f"{a.name}@{a.version}" for a in reversed(self.base_chain()))

    def with_version(self, version: int) -> Analysis:
        return dataclasses.replace(self, version=version)


# -- constructors -------------------------------------------------------------


def func_analysis(name: str, fn: Callable, **opts: Any) -> Analysis:
    return Analysis(name, Target.FUNCTION, Kind.SIMPLE, fn, **opts)


def dependency_func_analysis(name: str, bottom: Any, fn: Callable, **opts: Any) -> Analysis:
    return Analysis(name, Target.FUNCTION, Kind.DEPENDENCY, fn, bottom=bottom, **opts)


def type_analysis(name: str, fn: Callable, **opts: Any) -> Analysis:
    return Analysis(name, Target.TYPE, Kind.SIMPLE, fn, **opts)


def dependency_type_analysis(name: str, bottom: Any, fn: Callable, **opts: Any) -> Analysis:
    return Analysis(name, Target.TYPE, Kind.DEPENDENCY, fn, bottom=bottom, **opts)


def constructor_analysis(name: str, fn: Callable, **opts: Any) -> Analysis:
    return Analysis(name, Target.CONSTRUCTOR, Kind.SIMPLE, fn, **opts)


def combined_func_analysis(name: str, base: Analysis, fn: Callable, **opts: Any) -> Analysis:
    return Analysis(name, Target.FUNCTION, Kind.COMBINED, fn, base=base, **opts)


def combined_type_analysis(name: str, base: Analysis, fn: Callable, **opts: Any) -> Analysis:
    return Analysis(name, Target.TYPE, Kind.COMBINED, fn, base=base, **opts)


def combined_dependency_func_analysis(
    name: str, base: Analysis, bottom: Any, fn: Callable, **opts: Any
) -> Analysis:
    return Analysis(name, Target.FUNCTION, Kind.COMBINED_DEPENDENCY, fn, bottom=bottom, base=base, **opts)


def combined_dependency_type_analysis(
    name: str, base: Analysis, bottom: Any, fn: Callable, **opts: Any
) -> Analysis:
    return Analysis(name, Target.TYPE, Kind.COMBINED_DEPENDENCY, fn, bottom=bottom, base=base, **opts)


# -- ProgInfo -------------------------------------------------------------------


@dataclass(frozen=True)
class ProgInfo:
    """Analysis values for one module (``local``) and its imports (``imported``)."""

    local: Mapping[QName, Any] = field(default_factory=dict)
    imported: Mapping[QName, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        overlap = self.local.keys() & self.imported.keys()
        if overlap:
            raise ValueError(f"names both local and imported: {sorted(overlap)[:5]}")
        object.__setattr__(self, "local", MappingProxyType(dict(self.local)))
        object.__setattr__(self, "imported", MappingProxyType(dict(self.imported)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProgInfo):
            return NotImplemented
        return dict(self.local) == dict(other.local) and dict(self.imported) == dict(other.imported)

    __hash__ = None  # type: ignore[assignment]


def lookup_prog_info(q: QName, info: ProgInfo) -> Any | None:
    if q in info.local:
        return info.local[q]
    return info.imported.get(q)


# -- registry -------------------------------------------------------------------


@dataclass(frozen=True)
class RegisteredAnalysis:
    analysis: Analysis

    @property
    def name(self) -> str:
        return self.analysis.name

    @property
    def version(self) -> int:
        return self.analysis.version


def cass_analysis(analysis: Analysis, show: Callable[[Any], str], version: int = 1) -> RegisteredAnalysis:
    """Attach a show function (and a version) to an analysis for registration."""
    return RegisteredAnalysis(dataclasses.replace(analysis, show=show, version=version))


class Registry:
    """Immutable name -> analysis table, validated on construction."""

    def __init__(self, entries: Iterable[RegisteredAnalysis]) -> None:
        table: dict[str, RegisteredAnalysis] = {}
        for entry in entries:
            if entry.name in table:
                raise RegistryError(f"analysis {entry.name!r} registered twice")
            table[entry.name] = entry
        for entry in table.values():
            chain = entry.analysis.base_chain()  # raises on cycles
            for base in chain[:-1]:
                if base.name not in table:
                    raise UnknownBaseAnalysis(
                        f"{entry.name}: base analysis {base.name!r} is not registered"
                    )
        # bases must be the registered descriptors (show function, version)
        bound: dict[str, Analysis] = {}

        def rebind(a: Analysis) -> Analysis:
            if a.name not in bound:
                a = table[a.name].analysis
                if a.base is not None:
                    a = dataclasses.replace(a, base=rebind(a.base))
                bound[a.name] = a
            return bound[a.name]

        self._table = {name: RegisteredAnalysis(rebind(e.analysis)) for name, e in table.items()}

    def __contains__(self, name: object) -> bool:
        return name in self._table

    def __iter__(self) -> Iterator[RegisteredAnalysis]:
        return iter(self._table[n] for n in self.names())

    def __len__(self) -> int:
        return len(self._table)

    def names(self) -> list[str]:
        return sorted(self._table)

    def get(self, name: str) -> Analysis:
        try:
            return self._table[name].analysis
        except KeyError:
            raise UnknownAnalysis(name, self.names()) from None

    def listing(self) -> list[tuple[str, Target, Kind]]:
        return [(e.name, e.analysis.target, e.analysis.kind) for e in self]

    def extended(self, *entries: RegisteredAnalysis) -> Registry:
        return Registry([*self._table.values(), *entries])
