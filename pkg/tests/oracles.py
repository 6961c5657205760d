"""
Reference implementations used only by the tests.

They deliberately avoid the package's solver and scheduling code: the
whole program is treated as one flat set of entities and iterated densely
(every entity recomputed from the previous round) until nothing changes.
"""

from __future__ import annotations

from collections import Counter
from itertools import product
from typing import Iterable

from cass.framework import Analysis, Kind, ProgInfo, Target
from cass.ir import Case, Comb, ConsPattern, Free, Lit, Module, Or, Var, called_functions, used_types


def _items(analysis: Analysis, modules: Iterable[Module]):
    for m in modules:
        if analysis.target is Target.FUNCTION:
            for f in m.functions:
                yield f.qname, f, None
        elif analysis.target is Target.TYPE:
            for t in m.types:
                yield t.qname, t, None
        else:
            for t in m.types:
                for c in t.constructors:
                    yield c.qname, c, t


def _deps(analysis: Analysis, decl) -> tuple:
    if analysis.target is Target.FUNCTION:
        return () if decl.is_external else called_functions(decl)
    return used_types(decl)


def dense_kleene(analysis: Analysis, modules: Iterable[Module], max_rounds: int = 10_000) -> dict:
    """Whole-program values of ``analysis`` by dense (Jacobi style) Kleene iteration."""
    modules = list(modules)
    base_info = None
    if analysis.base is not None:
        base_info = ProgInfo(dense_kleene(analysis.base, modules, max_rounds), {})
    items = list(_items(analysis, modules))
    is_ext = {q: getattr(d, "is_external", False) for q, d, _ in items}

    def step(q, decl, owner, values):
        if is_ext[q]:
            return analysis.default_for(q)
        fn = analysis.transfer
        if analysis.target is Target.CONSTRUCTOR:
            return fn(decl, owner)
        called = [(d, values[d] if d in values else analysis.default_for(d)) for d in _deps(analysis, decl)]
        return {
            Kind.SIMPLE: lambda: fn(decl),
            Kind.DEPENDENCY: lambda: fn(decl, called),
            Kind.COMBINED: lambda: fn(base_info, decl),
            Kind.COMBINED_DEPENDENCY: lambda: fn(base_info, decl, called),
        }[analysis.kind]()

    values = {q: analysis.start_value(d) for q, d, _ in items}
    for _ in range(max_rounds):
        new = {q: step(q, d, o, values) for q, d, o in items}
        if new == values:
            return values
        values = new
    raise AssertionError(f"dense iteration of {analysis.name} did not stabilize")


def count_nodes(e, kind: type) -> int:
    """Generic node counter written without the package's traversal helpers."""
    n = 1 if isinstance(e, kind) else 0
    if isinstance(e, Comb):
        n += sum(count_nodes(a, kind) for a in e.args)
    elif isinstance(e, Case):
        n += count_nodes(e.scrutinee, kind) + sum(count_nodes(b, kind) for _, b in e.branches)
    elif isinstance(e, Or):
        n += count_nodes(e.left, kind) + count_nodes(e.right, kind)
    elif isinstance(e, Free):
        n += count_nodes(e.body, kind)
    return n


def paths(e) -> list[Counter]:
    """Every execution path through ``e`` as a multiset of variable occurrences."""
    if isinstance(e, Var):
        return [Counter({e.index: 1})]
    if isinstance(e, Lit):
        return [Counter()]
    if isinstance(e, Comb):
        out = [Counter()]
        for a in e.args:
            out = [p + q for p in out for q in paths(a)]
        return out
    if isinstance(e, Case):
        scr = paths(e.scrutinee)
        return [p + q for p in scr for _, b in e.branches for q in paths(b)]
    if isinstance(e, Or):
        return paths(e.left) + paths(e.right)
    if isinstance(e, Free):
        return paths(e.body)
    raise TypeError(e)


def linear_on_all_paths(e) -> bool:
    return all(max(p.values(), default=0) <= 1 for p in paths(e))


def evaluate_bool(e, env: dict[int, str]) -> set[str | None]:
    """Possible outcomes of a tiny first-order fragment (Bool constructors only).

    Returns constructor names, with ``None`` standing for failure.
    """
    if isinstance(e, Var):
        return {env[e.index]}
    if isinstance(e, Comb) and not e.args:
        return {e.qname.name}
    if isinstance(e, Lit):
        return {str(e.literal.value)}
    if isinstance(e, Or):
        return evaluate_bool(e.left, env) | evaluate_bool(e.right, env)
    if isinstance(e, Case):
        out: set[str | None] = set()
        for s in evaluate_bool(e.scrutinee, env):
            hits = [b for p, b in e.branches if isinstance(p, ConsPattern) and p.qname.name == s]
            if not hits:
                out.add(None)
            for b in hits:
                out |= evaluate_bool(b, env)
        return out
    raise TypeError(e)


def never_fails(params: tuple[int, ...], body, domain=("True", "False")) -> bool:
    """Every ground input has at least one successful outcome."""
    for combo in product(domain, repeat=len(params)):
        res = evaluate_bool(body, dict(zip(params, combo)))
        if res <= {None}:
            return False
    return True


def _visibility(modules: Iterable[Module]) -> dict:
    out = {}
    for m in modules:
        for f in m.functions:
            out[f.qname] = f.visibility
        for t in m.types:
            out[t.qname] = t.visibility
            for c in t.constructors:
                out[c.qname] = c.visibility
    return out


def interface(values: dict, module: Module, modules: dict[str, Module]) -> dict:
    """Oracle values visible to ``module`` through its direct imports (public entities only)."""
    vis = _visibility(modules[i] for i in module.imports)
    return {
        q: v for q, v in values.items()
        if q.module in module.imports and vis.get(q) is not None and vis[q].value == "Public"
    }


def module_info(values: dict, module: Module, modules: dict[str, Module]) -> ProgInfo:
    local = {q: v for q, v in values.items() if q.module == module.name}
    return ProgInfo(local, interface(values, module, modules))
