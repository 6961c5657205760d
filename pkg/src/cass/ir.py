"""
FlatCurry-style intermediate representation.

Modules are stored on disk as ``<Module>.fcy.json`` (see ``docs/ir-format.md``).
Everything here is immutable once built, so loaded modules can be shared
freely between worker threads.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator, Union

from cass.errors import CassError


class ParseError(CassError):
    def __init__(self, position: str, message: str) -> None:
        super().__init__(f"{position}: {message}")
        self.position = position
        self.message = message


class ValidationError(CassError):
    def __init__(self, module: str, violations: list[str]) -> None:
        super().__init__(f"module {module!r} is invalid:\n  " + "\n  ".join(violations))
        self.module = module
        self.violations = violations


class ExternalFunction(CassError):
    """Raised when asking for the body of a primitively implemented function."""


@dataclass(frozen=True, order=True)
class QName:
    module: str
    name: str

    def __post_init__(self) -> None:
        if not self.module or not self.name:
            raise ValueError(f"empty component in qualified name {self.module!r}.{self.name!r}")

    def __str__(self) -> str:
        return f"{self.module}.{self.name}"


class Visibility(str, Enum):
    PUBLIC = "Public"
    PRIVATE = "Private"


class CombType(str, Enum):
    FUNC_CALL = "FuncCall"
    CONS_CALL = "ConsCall"


class CaseType(str, Enum):
    RIGID = "Rigid"
    FLEX = "Flex"


# -- type expressions -------------------------------------------------------


@dataclass(frozen=True)
class TypeVar:
    index: int


@dataclass(frozen=True)
class FuncType:
    domain: TypeExpr
    range: TypeExpr


@dataclass(frozen=True)
class TypeCons:
    qname: QName
    args: tuple[TypeExpr, ...] = ()


TypeExpr = Union[TypeVar, FuncType, TypeCons]


@dataclass(frozen=True)
class ConsDecl:
    qname: QName
    arity: int
    arg_types: tuple[TypeExpr, ...] = ()
    visibility: Visibility = Visibility.PUBLIC


@dataclass(frozen=True)
class TypeDecl:
    qname: QName
    visibility: Visibility
    type_params: tuple[int, ...]
    constructors: tuple[ConsDecl, ...]
    # abstract/primitive types (Int, Char, ...) have no constructors
    external: bool = False


# -- expressions ------------------------------------------------------------


@dataclass(frozen=True)
class Literal:
    kind: str  # "Int" | "Char" | "Float"
    value: int | str | float


@dataclass(frozen=True)
class Var:
    index: int


@dataclass(frozen=True)
class Lit:
    literal: Literal


@dataclass(frozen=True)
class Comb:
    ctype: CombType
    qname: QName
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class ConsPattern:
    qname: QName
    vars: tuple[int, ...] = ()


@dataclass(frozen=True)
class LitPattern:
    literal: Literal


Pattern = Union[ConsPattern, LitPattern]


@dataclass(frozen=True)
class Case:
    ctype: CaseType
    scrutinee: Expr
    branches: tuple[tuple[Pattern, Expr], ...]


@dataclass(frozen=True)
class Or:
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Free:
    vars: tuple[int, ...]
    body: Expr


Expr = Union[Var, Lit, Comb, Case, Or, Free]


@dataclass(frozen=True)
class Rule:
    params: tuple[int, ...]
    body: Expr


@dataclass(frozen=True)
class External:
    label: str


@dataclass(frozen=True)
class FuncDecl:
    qname: QName
    arity: int
    visibility: Visibility
    type_sig: TypeExpr
    rule: Rule | External

    @property
    def is_external(self) -> bool:
        return isinstance(self.rule, External)


@dataclass(frozen=True)
class Module:
    name: str
    imports: tuple[str, ...] = ()
    types: tuple[TypeDecl, ...] = ()
    functions: tuple[FuncDecl, ...] = ()
    source_hash: int = 0

    def constructors(self) -> Iterator[tuple[ConsDecl, TypeDecl]]:
        for t in self.types:
            for c in t.constructors:
                yield c, t

    def function(self, name: str) -> FuncDecl | None:
        for f in self.functions:
            if f.qname.name == name:
                return f
        return None


# -- syntactic queries --------------------------------------------------------


def subexprs(e: Expr) -> Iterator[Expr]:
    """Immediate sub-expressions of ``e``."""
    if isinstance(e, Comb):
        yield from e.args
    elif isinstance(e, Case):
        yield e.scrutinee
        for _, b in e.branches:
            yield b
    elif isinstance(e, Or):
        yield e.left
        yield e.right
    elif isinstance(e, Free):
        yield e.body


def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal of every node in ``e``."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(list(subexprs(node))))


def or_in_expr(e: Expr) -> bool:
    if isinstance(e, (Var, Lit)):
        return False
    if isinstance(e, Comb):
        return any(or_in_expr(a) for a in e.args)
    if isinstance(e, Case):
        return or_in_expr(e.scrutinee) or any(or_in_expr(b) for _, b in e.branches)
    if isinstance(e, Or):
        return True
    if isinstance(e, Free):
        return or_in_expr(e.body)
    raise TypeError(f"not an expression: {e!r}")


def free_var_in_expr(e: Expr) -> bool:
    if isinstance(e, (Var, Lit)):
        return False
    if isinstance(e, Comb):
        return any(free_var_in_expr(a) for a in e.args)
    if isinstance(e, Case):
        return free_var_in_expr(e.scrutinee) or any(free_var_in_expr(b) for _, b in e.branches)
    if isinstance(e, Or):
        return free_var_in_expr(e.left) or free_var_in_expr(e.right)
    if isinstance(e, Free):
        return True
    raise TypeError(f"not an expression: {e!r}")


def called_functions(f: FuncDecl) -> tuple[QName, ...]:
    """Sorted, duplicate-free names of the functions called in the body of ``f``."""
    if isinstance(f.rule, External):
        raise ExternalFunction(f"{f.qname} is external")
    names = {
        node.qname
        for node in walk(f.rule.body)
        if isinstance(node, Comb) and node.ctype is CombType.FUNC_CALL
    }
    return tuple(sorted(names))


def type_constructors_in(t: TypeExpr) -> Iterator[QName]:
    if isinstance(t, TypeCons):
        yield t.qname
        for a in t.args:
            yield from type_constructors_in(a)
    elif isinstance(t, FuncType):
        yield from type_constructors_in(t.domain)
        yield from type_constructors_in(t.range)


def has_func_type(t: TypeExpr) -> bool:
    if isinstance(t, FuncType):
        return True
    if isinstance(t, TypeCons):
        return any(has_func_type(a) for a in t.args)
    return False


def used_types(t: TypeDecl) -> tuple[QName, ...]:
    names = {q for c in t.constructors for at in c.arg_types for q in type_constructors_in(at)}
    return tuple(sorted(names))


def referenced_names(m: Module) -> Iterator[tuple[str, QName, QName]]:
    """Yield ``(kind, user, referenced)`` for every cross-entity reference in ``m``.

    ``kind`` is one of ``"func"``, ``"cons"`` or ``"type"``.
    """
    for f in m.functions:
        for q in type_constructors_in(f.type_sig):
            yield "type", f.qname, q
        if isinstance(f.rule, External):
            continue
        for node in walk(f.rule.body):
            if isinstance(node, Comb):
                kind = "func" if node.ctype is CombType.FUNC_CALL else "cons"
                yield kind, f.qname, node.qname
            elif isinstance(node, Case):
                for pat, _ in node.branches:
                    if isinstance(pat, ConsPattern):
                        yield "cons", f.qname, pat.qname
    for t in m.types:
        for c in t.constructors:
            for at in c.arg_types:
                for q in type_constructors_in(at):
                    yield "type", c.qname, q


# -- hashing / decoding -------------------------------------------------------


def hash_bytes(data: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")


def _qname(obj, where: str) -> QName:
    if (
        not isinstance(obj, list)
        or len(obj) != 2
        or not all(isinstance(s, str) and s for s in obj)
    ):
        raise ParseError(where, f"expected [module, name], got {obj!r}")
    return QName(obj[0], obj[1])


def _tagged(obj, where: str) -> tuple[str, object]:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ParseError(where, f"expected a single-key tagged object, got {obj!r}")
    (tag, payload), = obj.items()
    return tag, payload


def _int(obj, where: str) -> int:
    if isinstance(obj, bool) or not isinstance(obj, int):
        raise ParseError(where, f"expected an integer, got {obj!r}")
    return obj


def _literal(obj, where: str) -> Literal:
    tag, v = _tagged(obj, where)
    if tag == "Int" and isinstance(v, int) and not isinstance(v, bool):
        return Literal("Int", v)
    if tag == "Char" and isinstance(v, str) and len(v) == 1:
        return Literal("Char", v)
    if tag == "Float" and isinstance(v, (int, float)) and not isinstance(v, bool):
        return Literal("Float", float(v))
    raise ParseError(where, f"bad literal {obj!r}")


def _enum(cls, value, where: str):
    try:
        return cls(value)
    except ValueError:
        raise ParseError(where, f"expected one of {[m.value for m in cls]}, got {value!r}") from None


def decode_type(obj, where: str = "type") -> TypeExpr:
    tag, p = _tagged(obj, where)
    if tag == "TVar":
        return TypeVar(_int(p, where))
    if tag == "FuncType":
        if not isinstance(p, list) or len(p) != 2:
            raise ParseError(where, "FuncType expects [domain, range]")
        return FuncType(decode_type(p[0], where + ".dom"), decode_type(p[1], where + ".rng"))
    if tag == "TCons":
        if not isinstance(p, dict):
            raise ParseError(where, "TCons expects an object")
        args = p.get("args", [])
        return TypeCons(
            _qname(p.get("name"), where),
            tuple(decode_type(a, f"{where}.args[{i}]") for i, a in enumerate(args)),
        )
    raise ParseError(where, f"unknown type tag {tag!r}")


def decode_pattern(obj, where: str) -> Pattern:
    tag, p = _tagged(obj, where)
    if tag == "ConsPattern":
        if not isinstance(p, dict):
            raise ParseError(where, "ConsPattern expects an object")
        return ConsPattern(
            _qname(p.get("name"), where),
            tuple(_int(v, where) for v in p.get("vars", [])),
        )
    if tag == "LitPattern":
        return LitPattern(_literal(p, where))
    raise ParseError(where, f"unknown pattern tag {tag!r}")


def decode_expr(obj, where: str = "expr") -> Expr:
    tag, p = _tagged(obj, where)
    if tag == "Var":
        return Var(_int(p, where))
    if tag == "Lit":
        return Lit(_literal(p, where))
    if tag == "Comb":
        if not isinstance(p, dict):
            raise ParseError(where, "Comb expects an object")
        return Comb(
            _enum(CombType, p.get("ctype"), where),
            _qname(p.get("name"), where),
            tuple(decode_expr(a, f"{where}.args[{i}]") for i, a in enumerate(p.get("args", []))),
        )
    if tag == "Case":
        if not isinstance(p, dict):
            raise ParseError(where, "Case expects an object")
        branches = []
        for i, br in enumerate(p.get("branches", [])):
            if not isinstance(br, list) or len(br) != 2:
                raise ParseError(f"{where}.branches[{i}]", "branch must be [pattern, expr]")
            branches.append(
                (decode_pattern(br[0], f"{where}.branches[{i}]"), decode_expr(br[1], f"{where}.branches[{i}]"))
            )
        return Case(
            _enum(CaseType, p.get("ctype"), where),
            decode_expr(p.get("scrutinee"), where + ".scrutinee"),
            tuple(branches),
        )
    if tag == "Or":
        if not isinstance(p, list) or len(p) != 2:
            raise ParseError(where, "Or expects [left, right]")
        return Or(decode_expr(p[0], where + ".left"), decode_expr(p[1], where + ".right"))
    if tag == "Free":
        if not isinstance(p, dict):
            raise ParseError(where, "Free expects an object")
        return Free(
            tuple(_int(v, where) for v in p.get("vars", [])),
            decode_expr(p.get("body"), where + ".body"),
        )
    raise ParseError(where, f"unknown expression tag {tag!r}")


def decode_module(obj, source_hash: int = 0) -> Module:
    if not isinstance(obj, dict):
        raise ParseError("$", "top level must be an object")
    name = obj.get("module")
    if not isinstance(name, str) or not name:
        raise ParseError("$.module", "missing module name")
    imports = obj.get("imports", [])
    if not isinstance(imports, list) or not all(isinstance(i, str) and i for i in imports):
        raise ParseError("$.imports", "expected a list of module names")

    types = []
    for i, t in enumerate(obj.get("types", [])):
        where = f"$.types[{i}]"
        if not isinstance(t, dict):
            raise ParseError(where, "expected an object")
        conses = []
        for j, c in enumerate(t.get("constructors", [])):
            cw = f"{where}.constructors[{j}]"
            if not isinstance(c, dict):
                raise ParseError(cw, "expected an object")
            conses.append(
                ConsDecl(
                    _qname(c.get("name"), cw),
                    _int(c.get("arity"), cw),
                    tuple(decode_type(a, f"{cw}.args[{k}]") for k, a in enumerate(c.get("args", []))),
                    _enum(Visibility, c.get("visibility", "Public"), cw),
                )
            )
        types.append(
            TypeDecl(
                _qname(t.get("name"), where),
                _enum(Visibility, t.get("visibility"), where),
                tuple(_int(v, where) for v in t.get("params", [])),
                tuple(conses),
                bool(t.get("external", False)),
            )
        )

    functions = []
    for i, f in enumerate(obj.get("functions", [])):
        where = f"$.functions[{i}]"
        if not isinstance(f, dict):
            raise ParseError(where, "expected an object")
        tag, r = _tagged(f.get("rule"), where + ".rule")
        if tag == "Rule":
            if not isinstance(r, dict):
                raise ParseError(where, "Rule expects an object")
            rule: Rule | External = Rule(
                tuple(_int(v, where) for v in r.get("params", [])),
                decode_expr(r.get("body"), where + ".body"),
            )
        elif tag == "External":
            if not isinstance(r, str):
                raise ParseError(where, "External expects a label string")
            rule = External(r)
        else:
            raise ParseError(where, f"unknown rule tag {tag!r}")
        functions.append(
            FuncDecl(
                _qname(f.get("name"), where),
                _int(f.get("arity"), where),
                _enum(Visibility, f.get("visibility"), where),
                decode_type(f.get("type"), where + ".type"),
                rule,
            )
        )
    return Module(name, tuple(imports), tuple(types), tuple(functions), source_hash)


# -- encoding -------------------------------------------------------------------


def _q(q: QName) -> list[str]:
    return [q.module, q.name]


def encode_literal(lit: Literal) -> dict:
    return {lit.kind: lit.value}


def encode_type(t: TypeExpr) -> dict:
    if isinstance(t, TypeVar):
        return {"TVar": t.index}
    if isinstance(t, FuncType):
        return {"FuncType": [encode_type(t.domain), encode_type(t.range)]}
    return {"TCons": {"name": _q(t.qname), "args": [encode_type(a) for a in t.args]}}


def encode_pattern(p: Pattern) -> dict:
    if isinstance(p, ConsPattern):
        return {"ConsPattern": {"name": _q(p.qname), "vars": list(p.vars)}}
    return {"LitPattern": encode_literal(p.literal)}


def encode_expr(e: Expr) -> dict:
    if isinstance(e, Var):
        return {"Var": e.index}
    if isinstance(e, Lit):
        return {"Lit": encode_literal(e.literal)}
    if isinstance(e, Comb):
        return {"Comb": {"ctype": e.ctype.value, "name": _q(e.qname), "args": [encode_expr(a) for a in e.args]}}
    if isinstance(e, Case):
        return {
            "Case": {
                "ctype": e.ctype.value,
                "scrutinee": encode_expr(e.scrutinee),
                "branches": [[encode_pattern(p), encode_expr(b)] for p, b in e.branches],
            }
        }
    if isinstance(e, Or):
        return {"Or": [encode_expr(e.left), encode_expr(e.right)]}
    return {"Free": {"vars": list(e.vars), "body": encode_expr(e.body)}}


def encode_module(m: Module) -> dict:
    return {
        "module": m.name,
        "imports": list(m.imports),
        "types": [
            {
                "name": _q(t.qname),
                "visibility": t.visibility.value,
                "params": list(t.type_params),
                "external": t.external,
                "constructors": [
                    {
                        "name": _q(c.qname),
                        "arity": c.arity,
                        "visibility": c.visibility.value,
                        "args": [encode_type(a) for a in c.arg_types],
                    }
                    for c in t.constructors
                ],
            }
            for t in m.types
        ],
        "functions": [
            {
                "name": _q(f.qname),
                "arity": f.arity,
                "visibility": f.visibility.value,
                "type": encode_type(f.type_sig),
                "rule": (
                    {"External": f.rule.label}
                    if isinstance(f.rule, External)
                    else {"Rule": {"params": list(f.rule.params), "body": encode_expr(f.rule.body)}}
                ),
            }
            for f in m.functions
        ],
    }


def write_module(m: Module, directory: str | Path) -> Path:
    path = Path(directory) / f"{m.name}.fcy.json"
    path.write_text(json.dumps(encode_module(m), indent=1) + "\n", encoding="utf-8")
    return path


# -- validation ---------------------------------------------------------------------


def validate(m: Module) -> list[str]:
    """Return the list of invariant violations in ``m`` (empty when well formed).

    Only module-local facts are checked; references into imports are
    link-checked by the module manager once the imports are loaded.
    """
    problems: list[str] = []

    seen_funcs: set[QName] = set()
    for f in m.functions:
        if f.qname in seen_funcs:
            problems.append(f"duplicate function {f.qname}")
        seen_funcs.add(f.qname)
        if f.qname.module != m.name:
            problems.append(f"function {f.qname} does not belong to module {m.name}")

    seen_types: set[QName] = set()
    seen_cons: set[QName] = set()
    arities: dict[QName, int] = {}
    type_arities: dict[QName, int] = {}
    for t in m.types:
        if t.qname in seen_types:
            problems.append(f"duplicate type {t.qname}")
        seen_types.add(t.qname)
        type_arities[t.qname] = len(t.type_params)
        if t.qname.module != m.name:
            problems.append(f"type {t.qname} does not belong to module {m.name}")
        if not t.constructors and not t.external:
            problems.append(f"type {t.qname} has no constructors but is not marked external")
        for c in t.constructors:
            if c.qname in seen_cons:
                problems.append(f"duplicate constructor {c.qname}")
            seen_cons.add(c.qname)
            arities[c.qname] = c.arity
            if c.qname.module != m.name:
                problems.append(f"constructor {c.qname} does not belong to module {m.name}")
            if c.arity < 0 or c.arity != len(c.arg_types):
                problems.append(f"constructor {c.qname}: arity {c.arity} != {len(c.arg_types)} argument types")

    def check_type(t: TypeExpr, owner: QName) -> None:
        if isinstance(t, TypeCons):
            want = type_arities.get(t.qname)
            if want is not None and want != len(t.args):
                problems.append(f"{owner}: type {t.qname} applied to {len(t.args)} arguments, expects {want}")
            for a in t.args:
                check_type(a, owner)
        elif isinstance(t, FuncType):
            check_type(t.domain, owner)
            check_type(t.range, owner)

    for t in m.types:
        for c in t.constructors:
            for a in c.arg_types:
                check_type(a, c.qname)

    for f in m.functions:
        check_type(f.type_sig, f.qname)
        if f.arity < 0:
            problems.append(f"function {f.qname}: negative arity")
        if isinstance(f.rule, External):
            continue
        params = f.rule.params
        if len(params) != f.arity:
            problems.append(f"function {f.qname}: {len(params)} parameters for arity {f.arity}")
        if len(set(params)) != len(params):
            problems.append(f"function {f.qname}: repeated parameter variables")
        _check_expr(f.rule.body, set(params), f.qname, arities, problems)
    return problems


def _check_expr(e: Expr, bound: set[int], owner: QName, arities: dict[QName, int], problems: list[str]) -> None:
    # iterative would be nicer for deep bodies, but corpus bodies are shallow
    if isinstance(e, Var):
        if e.index not in bound:
            problems.append(f"{owner}: unbound variable {e.index}")
    elif isinstance(e, Comb):
        for a in e.args:
            _check_expr(a, bound, owner, arities, problems)
    elif isinstance(e, Or):
        _check_expr(e.left, bound, owner, arities, problems)
        _check_expr(e.right, bound, owner, arities, problems)
    elif isinstance(e, Free):
        clash = bound.intersection(e.vars)
        if clash or len(set(e.vars)) != len(e.vars):
            problems.append(f"{owner}: free variables {sorted(clash) or list(e.vars)} shadow or repeat")
        _check_expr(e.body, bound | set(e.vars), owner, arities, problems)
    elif isinstance(e, Case):
        _check_expr(e.scrutinee, bound, owner, arities, problems)
        if not e.branches:
            problems.append(f"{owner}: case expression without branches")
        kinds = {type(p) for p, _ in e.branches}
        if len(kinds) > 1:
            problems.append(f"{owner}: case mixes constructor and literal patterns")
        keys = [p.qname if isinstance(p, ConsPattern) else p.literal for p, _ in e.branches]
        if len(set(keys)) != len(keys):
            problems.append(f"{owner}: case has repeated patterns")
        for pat, body in e.branches:
            pvars: tuple[int, ...] = ()
            if isinstance(pat, ConsPattern):
                pvars = pat.vars
                want = arities.get(pat.qname)
                if want is not None and want != len(pvars):
                    problems.append(f"{owner}: pattern {pat.qname} binds {len(pvars)} variables, arity is {want}")
                clash = bound.intersection(pvars)
                if clash or len(set(pvars)) != len(pvars):
                    problems.append(f"{owner}: pattern variables of {pat.qname} shadow or repeat")
            _check_expr(body, bound | set(pvars), owner, arities, problems)


def parse_module(data: bytes, origin: str = "<bytes>") -> Module:
    try:
        obj = json.loads(data.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise ParseError(f"{origin}@{exc.start}", "file is not valid UTF-8") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{origin}:{exc.lineno}:{exc.colno}", exc.msg) from None
    try:
        module = decode_module(obj, hash_bytes(data))
    except ValueError as exc:  # empty QName components
        raise ParseError(origin, str(exc)) from None
    problems = validate(module)
    if problems:
        raise ValidationError(module.name, problems)
    return module


def load_module(path: str | Path) -> Module:
    """Read, decode and validate one ``.fcy.json`` file."""
    path = Path(path)
    return parse_module(path.read_bytes(), str(path))
