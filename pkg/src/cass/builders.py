"""Shorthand constructors for writing IR by hand (corpus scripts, tests)."""

from __future__ import annotations

from cass.ir import (
    Case,
    CaseType,
    Comb,
    CombType,
    ConsDecl,
    ConsPattern,
    Expr,
    External,
    Free,
    FuncDecl,
    FuncType,
    Lit,
    Literal,
    LitPattern,
    Module,
    Or,
    Pattern,
    QName,
    Rule,
    TypeCons,
    TypeDecl,
    TypeExpr,
    TypeVar,
    Var,
    Visibility,
)

PUBLIC, PRIVATE = Visibility.PUBLIC, Visibility.PRIVATE


def q(qualified: str) -> QName:
    """``"Prelude.++"`` -> QName("Prelude", "++"); splits at the first dot."""
    module, _, name = qualified.partition(".")
    return QName(module, name)


def v(i: int) -> Var:
    return Var(i)


def lit(x: int | str | float) -> Lit:
    if isinstance(x, str):
        return Lit(Literal("Char", x))
    if isinstance(x, float):
        return Lit(Literal("Float", x))
    return Lit(Literal("Int", x))


def call(name: str | QName, *args: Expr) -> Comb:
    return Comb(CombType.FUNC_CALL, name if isinstance(name, QName) else q(name), tuple(args))


def cons(name: str | QName, *args: Expr) -> Comb:
    return Comb(CombType.CONS_CALL, name if isinstance(name, QName) else q(name), tuple(args))


def pcons(name: str | QName, *vars: int) -> ConsPattern:
    return ConsPattern(name if isinstance(name, QName) else q(name), tuple(vars))


def plit(x: int | str | float) -> LitPattern:
    return LitPattern(lit(x).literal)


def fcase(scrutinee: Expr, *branches: tuple[Pattern, Expr]) -> Case:
    return Case(CaseType.FLEX, scrutinee, tuple(branches))


def rcase(scrutinee: Expr, *branches: tuple[Pattern, Expr]) -> Case:
    return Case(CaseType.RIGID, scrutinee, tuple(branches))


def orr(left: Expr, right: Expr) -> Or:
    return Or(left, right)


def free(vars: list[int] | tuple[int, ...], body: Expr) -> Free:
    return Free(tuple(vars), body)


def tcon(name: str | QName, *args: TypeExpr) -> TypeCons:
    return TypeCons(name if isinstance(name, QName) else q(name), tuple(args))


def tvar(i: int) -> TypeVar:
    return TypeVar(i)


def arrow(*types: TypeExpr) -> TypeExpr:
    """Curried function type ``t1 -> t2 -> ... -> tn``."""
    out = types[-1]
    for t in reversed(types[:-1]):
        out = FuncType(t, out)
    return out


def fun(
    name: str,
    params: list[int],
    body: Expr,
    type_sig: TypeExpr | None = None,
    visibility: Visibility = PUBLIC,
) -> FuncDecl:
    sig = type_sig if type_sig is not None else arrow(*([tvar(0)] * (len(params) + 1)))
    return FuncDecl(q(name), len(params), visibility, sig, Rule(tuple(params), body))


def ext(name: str, arity: int, type_sig: TypeExpr | None = None, visibility: Visibility = PUBLIC) -> FuncDecl:
    sig = type_sig if type_sig is not None else arrow(*([tvar(0)] * (arity + 1)))
    return FuncDecl(q(name), arity, visibility, sig, External(name))


def data(
    name: str,
    params: list[int],
    *constructors: tuple[str, list[TypeExpr]],
    visibility: Visibility = PUBLIC,
    external: bool = False,
) -> TypeDecl:
    return TypeDecl(
        q(name),
        visibility,
        tuple(params),
        tuple(ConsDecl(q(c), len(args), tuple(args), visibility) for c, args in constructors),
        external,
    )


def module(name: str, imports: list[str], types: list[TypeDecl], functions: list[FuncDecl]) -> Module:
    return Module(name, tuple(imports), tuple(types), tuple(functions))
