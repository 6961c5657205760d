"""
The analyses shipped with the system and the static registry.

Domains and their orders (bottom first):

=============  ===================  ==============================
Overlapping    bool                 simple, no order needed
Deterministic  DetDom               Det < NonDet
SiblingCons    tuple[QName, ...]    simple (constructors)
PatComplete    bool                 simple, combined on SiblingCons
Total          bool                 True < False, combined on PatComplete
HiOrdType      bool                 False < True (types)
RightLinear    bool                 True < False
Demand         frozenset[int]       full argument set < ... < {} (superset order)
SolComplete    bool                 True < False
=============  ===================  ==============================

External (primitive) functions never reach a transfer function; their
values come from ``data/externals.json`` or the per-analysis default.
"""

from __future__ import annotations

import json
from collections import Counter
from enum import Enum
from functools import reduce
from importlib import resources
from typing import Any, Iterable

from cass.errors import CassError
from cass.framework import (
    ProgInfo,
    Registry,
    cass_analysis,
    combined_dependency_func_analysis,
    combined_func_analysis,
    constructor_analysis,
    dependency_func_analysis,
    dependency_type_analysis,
    func_analysis,
    lookup_prog_info,
)
from cass.ir import (
    Case,
    CaseType,
    Comb,
    CombType,
    ConsDecl,
    ConsPattern,
    Expr,
    Free,
    FuncDecl,
    Lit,
    Or,
    QName,
    TypeDecl,
    Var,
    free_var_in_expr,
    has_func_type,
    or_in_expr,
    walk,
)


class MissingSiblingInfo(CassError):
    def __init__(self, qname: QName) -> None:
        super().__init__(f"no sibling information for constructor {qname}")
        self.qname = qname


def _load_manifest() -> dict[str, dict[str, Any]]:
    text = resources.files("cass").joinpath("data/externals.json").read_text(encoding="utf-8")
    return json.loads(text)


EXTERNALS = _load_manifest()


# -- Overlapping ----------------------------------------------------------------


def is_overlapping(f: FuncDecl) -> bool:
    return or_in_expr(f.rule.body)


def show_overlap(v: bool) -> str:
    return "overlapping" if v else "non-overlapping"


overlap_analysis = func_analysis(
    "Overlapping", is_overlapping, external_default=False, externals=EXTERNALS.get("Overlapping", {})
)


# -- Deterministic --------------------------------------------------------------


class DetDom(str, Enum):
    DET = "Det"
    NONDET = "NonDet"

    def __str__(self) -> str:
        return self.value


def nondet_func(f: FuncDecl, called: list[tuple[QName, DetDom]]) -> DetDom:
    e = f.rule.body
    if or_in_expr(e) or free_var_in_expr(e) or any(v is DetDom.NONDET for _, v in called):
        return DetDom.NONDET
    return DetDom.DET


def show_det(v: DetDom) -> str:
    return "deterministic" if v is DetDom.DET else "non-deterministic"


nondet_analysis = dependency_func_analysis(
    "Deterministic",
    DetDom.DET,
    nondet_func,
    external_default=DetDom.NONDET,
    externals=EXTERNALS.get("Deterministic", {}),
    encode=lambda v: v.value,
    decode=DetDom,
    leq=lambda a, b: a is DetDom.DET or b is DetDom.NONDET,
)


# -- SiblingCons -----------------------------------------------------------------


def siblings(c: ConsDecl, t: TypeDecl) -> tuple[QName, ...]:
    return tuple(sorted(o.qname for o in t.constructors if o.qname != c.qname))


def show_sibling(v: tuple[QName, ...]) -> str:
    return ", ".join(map(str, v)) if v else "no siblings"


def _encode_qnames(v: Iterable[QName]) -> list[list[str]]:
    return [[q.module, q.name] for q in v]


def _decode_qnames(raw: list[list[str]]) -> tuple[QName, ...]:
    return tuple(QName(m, n) for m, n in raw)


sibling_cons = constructor_analysis(
    "SiblingCons", siblings, external_default=(), encode=_encode_qnames, decode=_decode_qnames
)


# -- PatComplete -------------------------------------------------------------------


def is_pat_complete(siblings_info: ProgInfo, f: FuncDecl) -> bool:
    return _complete(f.rule.body, siblings_info)


def _complete(e: Expr, info: ProgInfo) -> bool:
    if isinstance(e, (Var, Lit, Comb)):
        return True
    if isinstance(e, Or):
        return _complete(e.left, info) or _complete(e.right, info)
    if isinstance(e, Free):
        return _complete(e.body, info)
    # Case: a literal case never covers its whole domain
    if not all(isinstance(p, ConsPattern) for p, _ in e.branches):
        return False
    covered = {p.qname for p, _ in e.branches}
    for c in covered:
        sibs = lookup_prog_info(c, info)
        if sibs is None:
            raise MissingSiblingInfo(c)
        if not covered.issuperset(sibs):
            return False
    return all(_complete(b, info) for _, b in e.branches)


def show_complete(v: bool) -> str:
    return "complete" if v else "incomplete"


pat_comp_analysis = combined_func_analysis(
    "PatComplete", sibling_cons, is_pat_complete,
    external_default=True, externals=EXTERNALS.get("PatComplete", {}),
)


# -- Total ---------------------------------------------------------------------------


def is_total(pc_info: ProgInfo, f: FuncDecl, called: list[tuple[QName, bool]]) -> bool:
    own = lookup_prog_info(f.qname, pc_info)
    return bool(own) and all(v for _, v in called)


def show_total(v: bool) -> str:
    return "totally defined" if v else "possibly partially defined"


def _true_below_false(a: bool, b: bool) -> bool:
    return a or not b


total_analysis = combined_dependency_func_analysis(
    "Total", pat_comp_analysis, True, is_total,
    external_default=False, externals=EXTERNALS.get("Total", {}), leq=_true_below_false,
)


# -- HiOrdType -------------------------------------------------------------------------


def hiord_type(t: TypeDecl, used: list[tuple[QName, bool]]) -> bool:
    if any(has_func_type(a) for c in t.constructors for a in c.arg_types):
        return True
    return any(v for _, v in used)


def show_hiord(v: bool) -> str:
    return "higher-order" if v else "first-order"


hiord_type_analysis = dependency_type_analysis(
    "HiOrdType", False, hiord_type, external_default=False, leq=lambda a, b: b or not a
)


# -- RightLinear -----------------------------------------------------------------------


def path_occurrences(e: Expr) -> Counter:
    """Per variable, the largest number of occurrences along one execution path."""
    if isinstance(e, Var):
        return Counter({e.index: 1})
    if isinstance(e, Lit):
        return Counter()
    if isinstance(e, Comb):
        return sum((path_occurrences(a) for a in e.args), Counter())
    if isinstance(e, Or):
        return path_occurrences(e.left) | path_occurrences(e.right)
    if isinstance(e, Free):
        return path_occurrences(e.body)
    alternatives = reduce(lambda a, b: a | b, (path_occurrences(b) for _, b in e.branches), Counter())
    return path_occurrences(e.scrutinee) + alternatives


def right_linear(f: FuncDecl, called: list[tuple[QName, bool]]) -> bool:
    if any(n > 1 for n in path_occurrences(f.rule.body).values()):
        return False
    return all(v for _, v in called)


def show_right_linear(v: bool) -> str:
    return "right-linear" if v else "not right-linear"


right_linear_analysis = dependency_func_analysis(
    "RightLinear", True, right_linear,
    external_default=True, externals=EXTERNALS.get("RightLinear", {}), leq=_true_below_false,
)


# -- Demand ----------------------------------------------------------------------------


def all_arguments(f: FuncDecl) -> frozenset[int]:
    return frozenset(range(1, f.arity + 1))


def demanded_vars(e: Expr, demands: dict[QName, frozenset[int]]) -> frozenset[int]:
    """Variables whose value is needed on every evaluation path of ``e``."""
    if isinstance(e, Var):
        return frozenset((e.index,))
    if isinstance(e, Lit):
        return frozenset()
    if isinstance(e, Comb):
        if e.ctype is CombType.CONS_CALL:
            return frozenset()
        out: frozenset[int] = frozenset()
        for j in sorted(demands[e.qname]):
            if j <= len(e.args):
                out |= demanded_vars(e.args[j - 1], demands)
        return out
    if isinstance(e, Case):
        branch_sets = [demanded_vars(b, demands) for _, b in e.branches]
        return demanded_vars(e.scrutinee, demands) | frozenset.intersection(*branch_sets)
    if isinstance(e, Or):
        return demanded_vars(e.left, demands) & demanded_vars(e.right, demands)
    return demanded_vars(e.body, demands) - frozenset(e.vars)


def demand(f: FuncDecl, called: list[tuple[QName, frozenset[int]]]) -> frozenset[int]:
    needed = demanded_vars(f.rule.body, dict(called))
    return frozenset(i for i, x in enumerate(f.rule.params, start=1) if x in needed)


def show_demand(v: frozenset[int]) -> str:
    if not v:
        return "no demanded arguments"
    return "demanded arguments: " + ",".join(map(str, sorted(v)))


demand_analysis = dependency_func_analysis(
    "Demand", all_arguments, demand,
    external_default=frozenset(),
    externals=EXTERNALS.get("Demand", {}),
    encode=lambda v: sorted(v),
    decode=frozenset,
    leq=lambda a, b: a >= b,
)


# -- SolComplete -------------------------------------------------------------------------


def sol_complete(f: FuncDecl, called: list[tuple[QName, bool]]) -> bool:
    rigid = any(isinstance(n, Case) and n.ctype is CaseType.RIGID for n in walk(f.rule.body))
    return not rigid and all(v for _, v in called)


def show_sol_complete(v: bool) -> str:
    return "solution complete" if v else "may suspend"


sol_complete_analysis = dependency_func_analysis(
    "SolComplete", True, sol_complete,
    external_default=False, externals=EXTERNALS.get("SolComplete", {}), leq=_true_below_false,
)


REGISTERED_ANALYSES = [
    cass_analysis(overlap_analysis, show_overlap),
    cass_analysis(nondet_analysis, show_det),
    cass_analysis(sibling_cons, show_sibling),
    cass_analysis(pat_comp_analysis, show_complete),
    cass_analysis(total_analysis, show_total),
    cass_analysis(hiord_type_analysis, show_hiord),
    cass_analysis(right_linear_analysis, show_right_linear),
    cass_analysis(demand_analysis, show_demand),
    cass_analysis(sol_complete_analysis, show_sol_complete),
]

REGISTRY = Registry(REGISTERED_ANALYSES)


def registry_list(registry: Registry = REGISTRY) -> list[tuple[str, str, str]]:
    return [(name, target.value, kind.value) for name, target, kind in registry.listing()]
