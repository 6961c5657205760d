"""
Random but well-formed IR modules and multi-module applications.

Used for fixture corpora and for scheduling/caching experiments.  All
generation is driven by an explicit ``random.Random`` so output is
reproducible from a seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from cass.builders import PRIVATE, PUBLIC, arrow, data, fun, tcon, tvar
from cass.ir import (
    Case,
    CaseType,
    Comb,
    CombType,
    ConsPattern,
    Expr,
    Free,
    FuncDecl,
    FuncType,
    Lit,
    Literal,
    LitPattern,
    Module,
    Or,
    QName,
    TypeDecl,
    TypeExpr,
    Var,
    write_module,
)


@dataclass
class _Ctx:
    rng: random.Random
    # callable functions: qname -> arity
    callees: dict[QName, int]
    # constructors by type: type -> [(cons, arity)]
    datatypes: dict[QName, list[tuple[QName, int]]]
    next_var: int = 0

    def fresh(self) -> int:
        self.next_var += 1
        return self.next_var


def _expr(ctx: _Ctx, bound: list[int], depth: int) -> Expr:
    rng = ctx.rng
    if depth <= 0:
        if bound and rng.random() < 0.7:
            return Var(rng.choice(bound))
        return Lit(Literal("Int", rng.randrange(10)))
    r = rng.random()
    if r < 0.15 and bound:
        return Var(rng.choice(bound))
    if r < 0.22:
        return Lit(Literal("Int", rng.randrange(10)))
    if r < 0.45 and ctx.callees:
        fq = rng.choice(sorted(ctx.callees))
        args = tuple(_expr(ctx, bound, depth - 1) for _ in range(ctx.callees[fq]))
        return Comb(CombType.FUNC_CALL, fq, args)
    if r < 0.55:
        tq = rng.choice(sorted(ctx.datatypes))
        cq, ar = rng.choice(ctx.datatypes[tq])
        return Comb(CombType.CONS_CALL, cq, tuple(_expr(ctx, bound, depth - 1) for _ in range(ar)))
    if r < 0.82:
        ctype = CaseType.FLEX if rng.random() < 0.75 else CaseType.RIGID
        scrutinee = Var(rng.choice(bound)) if bound and rng.random() < 0.8 else _expr(ctx, bound, depth - 1)
        if rng.random() < 0.12:
            values = rng.sample(range(5), rng.randint(1, 3))
            branches = tuple(
                (LitPattern(Literal("Int", x)), _expr(ctx, bound, depth - 1)) for x in sorted(values)
            )
            return Case(ctype, scrutinee, branches)
        tq = rng.choice(sorted(ctx.datatypes))
        conses = ctx.datatypes[tq]
        chosen = conses if rng.random() < 0.6 else rng.sample(conses, rng.randint(1, len(conses)))
        branches_l = []
        for cq, ar in chosen:
            pvars = [ctx.fresh() for _ in range(ar)]
            branches_l.append((ConsPattern(cq, tuple(pvars)), _expr(ctx, bound + pvars, depth - 1)))
        return Case(ctype, scrutinee, tuple(branches_l))
    if r < 0.9:
        return Or(_expr(ctx, bound, depth - 1), _expr(ctx, bound, depth - 1))
    fv = [ctx.fresh() for _ in range(rng.randint(1, 2))]
    return Free(tuple(fv), _expr(ctx, bound + fv, depth - 1))


def _public_functions(m: Module) -> dict[QName, int]:
    return {f.qname: f.arity for f in m.functions if f.visibility is PUBLIC}


def _public_types(m: Module) -> dict[QName, list[tuple[QName, int]]]:
    return {
        t.qname: [(c.qname, c.arity) for c in t.constructors]
        for t in m.types
        if t.visibility is PUBLIC and t.constructors
    }


def random_module(
    name: str,
    rng: random.Random,
    imports: list[Module],
    n_functions: int = 8,
    n_types: int = 2,
    depth: int = 3,
) -> Module:
    """A random module importing ``imports`` (which should include the Prelude)."""
    imported_funcs: dict[QName, int] = {}
    datatypes: dict[QName, list[tuple[QName, int]]] = {}
    for m in imports:
        imported_funcs.update(_public_functions(m))
        datatypes.update(_public_types(m))

    # local types; argument types may refer to any local type (mutual recursion)
    type_names = [QName(name, f"T{i}") for i in range(n_types)]
    types: list[TypeDecl] = []
    for i in range(n_types):
        conses = []
        for j in range(rng.randint(1, 3)):
            args: list[TypeExpr] = []
            for _ in range(rng.randint(0, 2)):
                pick = rng.random()
                if pick < 0.3 and type_names:
                    args.append(tcon(rng.choice(type_names)))
                elif pick < 0.45:
                    args.append(FuncType(tcon("Prelude.Int"), tcon("Prelude.Int")))
                elif pick < 0.6:
                    args.append(tcon("Prelude.List", tcon("Prelude.Int")))
                else:
                    args.append(tcon(rng.choice(["Prelude.Int", "Prelude.Bool"])))
            conses.append((f"{name}.C{i}_{j}", args))
        types.append(data(f"{name}.T{i}", [], *conses))
    local_types = {t.qname: [(c.qname, c.arity) for c in t.constructors] for t in types}

    arities = {QName(name, f"f{i}"): rng.randint(0, 3) for i in range(n_functions)}
    callees = dict(imported_funcs)
    callees.update(arities)
    ctx = _Ctx(rng, callees, {**datatypes, **local_types})

    functions: list[FuncDecl] = []
    for fq, arity in arities.items():
        ctx.next_var = 0
        params = [ctx.fresh() for _ in range(arity)]
        body = _expr(ctx, params, rng.randint(1, depth))
        vis = PRIVATE if rng.random() < 0.2 else PUBLIC
        sig = arrow(*([tvar(0)] * (arity + 1)))
        functions.append(fun(str(fq), params, body, sig, vis))
    return Module(name, tuple(m.name for m in imports), tuple(types), tuple(functions))


def application(
    prelude: Module, n_modules: int, rng: random.Random, prefix: str = "App", **module_opts
) -> list[Module]:
    """A layered application of ``n_modules`` modules; the last one is the main module.

    Every module imports the Prelude and up to three earlier modules, and every
    module is imported by some later one, so the main module reaches them all.
    """
    modules: list[Module] = []
    width = len(str(n_modules - 1))
    unimported: set[str] = set()
    for i in range(n_modules):
        name = f"{prefix}{i:0{width}d}"
        earlier = modules[:]
        picks = rng.sample(earlier, min(len(earlier), rng.randint(0, 3)))
        if i == n_modules - 1:
            picks += [m for m in earlier if m.name in unimported and m not in picks]
        elif unimported and rng.random() < 0.7:
            pending = sorted(unimported)
            m = next(x for x in earlier if x.name == pending[0])
            if m not in picks:
                picks.append(m)
        picks.sort(key=lambda m: m.name)
        mod = random_module(name, rng, [prelude, *picks], **module_opts)
        for p in picks:
            unimported.discard(p.name)
        unimported.add(name)
        modules.append(mod)
    return modules


def wide_application(prelude: Module, n_modules: int, rng: random.Random, **module_opts) -> list[Module]:
    """``n_modules - 1`` independent leaf modules plus a main module importing them all."""
    width = len(str(n_modules - 1))
    leaves = [
        random_module(f"Leaf{i:0{width}d}", rng, [prelude], **module_opts) for i in range(n_modules - 1)
    ]
    main = random_module("Main", rng, [prelude, *leaves], **module_opts)
    return [*leaves, main]


def write_all(modules: list[Module], directory: str | Path) -> list[Path]:
    Path(directory).mkdir(parents=True, exist_ok=True)
    return [write_module(m, directory) for m in modules]
