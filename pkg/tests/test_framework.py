from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cass.analyses import REGISTRY, nondet_analysis, pat_comp_analysis, registry_list, sibling_cons
from cass.api import Engine
from cass.builders import q
from cass.framework import (
    Analysis,
    Kind,
    ProgInfo,
    Registry,
    RegistryError,
    Target,
    UnknownAnalysis,
    UnknownBaseAnalysis,
    cass_analysis,
    combined_func_analysis,
    constructor_analysis,
    dependency_func_analysis,
    func_analysis,
    lookup_prog_info,
)
from cass.ir import QName
from cass.modules import resolve
from cass.fixpoint import run_simple


def test_registry_contains_the_named_analyses():
    names = REGISTRY.names()
    for n in ("Overlapping", "Deterministic", "PatComplete", "Total", "SiblingCons"):
        assert n in names
    assert len(names) == 9 == len(set(names))
    assert names == sorted(names)


def test_registry_list_is_deterministic():
    listing = registry_list()
    assert listing == registry_list()
    assert ("Total", "Function", "CombinedDependency") in listing
    assert ("SiblingCons", "Constructor", "Simple") in listing
    assert ("HiOrdType", "Type", "Dependency") in listing


def test_registry_grows_by_one():
    extra = cass_analysis(func_analysis("Arity", lambda f: f.arity), str)
    bigger = REGISTRY.extended(extra)
    assert len(bigger) == len(REGISTRY) + 1
    assert "Arity" in bigger and "Arity" not in REGISTRY


def test_registry_rejects_duplicates_and_unregistered_bases():
    with pytest.raises(RegistryError):
        REGISTRY.extended(cass_analysis(func_analysis("Overlapping", lambda f: 0), str))
    orphan_base = constructor_analysis("Orphan", lambda c, t: 0)
    combined = combined_func_analysis("Uses", orphan_base, lambda info, f: 0)
    with pytest.raises(UnknownBaseAnalysis):
        Registry([cass_analysis(combined, str)])


def test_registry_rebinds_bases_to_registered_descriptors():
    total = REGISTRY.get("Total")
    assert total.base is REGISTRY.get("PatComplete")
    assert total.base.base is REGISTRY.get("SiblingCons")
    assert total.cache_key() == "Total@1<PatComplete@1<SiblingCons@1"


def test_unknown_analysis():
    with pytest.raises(UnknownAnalysis) as info:
        REGISTRY.get("Frobnicate")
    assert "Overlapping" in str(info.value)


def test_descriptor_invariants():
    with pytest.raises(ValueError):
        Analysis("X", Target.FUNCTION, Kind.COMBINED, lambda *a: 0)
    with pytest.raises(ValueError):
        Analysis("X", Target.FUNCTION, Kind.SIMPLE, lambda *a: 0, base=sibling_cons)
    with pytest.raises(ValueError):
        Analysis("X", Target.CONSTRUCTOR, Kind.DEPENDENCY, lambda *a: 0)
    with pytest.raises(ValueError):
        func_analysis("X", lambda f: 0, version=0)


def test_base_chain_and_version_bump():
    assert [a.name for a in REGISTRY.get("Total").base_chain()] == ["SiblingCons", "PatComplete", "Total"]
    bumped = nondet_analysis.with_version(2)
    assert bumped.cache_key() == "Deterministic@2" != nondet_analysis.cache_key()


def test_bottom_may_depend_on_entity():
    a = dependency_func_analysis("Args", lambda f: frozenset(range(f.arity)), lambda f, c: frozenset())

    class F:
        arity = 3

    assert a.start_value(F()) == frozenset({0, 1, 2})


def test_external_defaults_come_from_manifest():
    det = REGISTRY.get("Deterministic")
    assert det.default_for(q("Prelude.+")).value == "Det"
    assert det.default_for(q("Prelude.apply")).value == "NonDet"
    total = REGISTRY.get("Total")
    assert total.default_for(q("Prelude.seq")) is True
    assert total.default_for(q("Prelude.div")) is False
    assert REGISTRY.get("PatComplete").default_for(q("Prelude.div")) is True
    assert REGISTRY.get("Overlapping").default_for(q("Prelude.div")) is False


# -- ProgInfo ------------------------------------------------------------------------

_qn = st.builds(QName, st.sampled_from(["A", "B"]), st.sampled_from(["f", "g", "h", "k"]))


@given(st.dictionaries(_qn, st.integers()), st.dictionaries(_qn, st.integers()), _qn)
def test_lookup_prog_info(local, imported, name):
    imported = {k: v for k, v in imported.items() if k not in local}
    info = ProgInfo(local, imported)
    got = lookup_prog_info(name, info)
    if name in local:
        assert got == local[name]
    elif name in imported:
        assert got == imported[name]
    else:
        assert got is None


def test_prog_info_rejects_overlap_and_is_read_only():
    with pytest.raises(ValueError):
        ProgInfo({q("A.f"): 1}, {q("A.f"): 2})
    info = ProgInfo({q("A.f"): 1})
    with pytest.raises(TypeError):
        info.local[q("A.g")] = 2  # type: ignore[index]


def test_lookup_of_imported_prelude_value(corpus_dir):
    eng = Engine([corpus_dir], cache_dir=False)
    info = eng.analyze_generic("Total", "Demo")
    alone = eng.analyze_generic("Total", "Prelude")
    assert lookup_prog_info(q("Prelude.not"), info) is alone.local[q("Prelude.not")] is True
    assert lookup_prog_info(q("Prelude.head"), info) is False
    # private Prelude entities are not part of the import interface
    assert lookup_prog_info(q("Prelude.rev"), info) is None
    assert lookup_prog_info(q("Demo.nothere"), info) is None


# -- generic properties over the corpus ------------------------------------------------


def test_show_is_nonempty_everywhere(corpus_modules, corpus_results):
    for a in REGISTRY:
        for name in corpus_modules:
            info = corpus_results[a.name, name]
            for value in info.local.values():
                assert a.analysis.show(value).strip(), (a.name, name)


def test_values_cover_exactly_the_local_entities(corpus_modules, corpus_results):
    for a in REGISTRY:
        target = a.analysis.target
        for name, m in corpus_modules.items():
            if target is Target.FUNCTION:
                want = {f.qname for f in m.functions}
            elif target is Target.TYPE:
                want = {t.qname for t in m.types}
            else:
                want = {c.qname for c, _ in m.constructors()}
            assert set(corpus_results[a.name, name].local) == want, (a.name, name)


def test_codec_round_trip(corpus_dir, corpus_modules):
    eng = Engine([corpus_dir], cache_dir=False)
    for a in REGISTRY:
        an = a.analysis
        for name in ("Prelude", "Demo", "EvenOdd"):
            for v in eng.analyze_generic(an, name).local.values():
                assert an.decode(an.encode(v)) == v


def test_combined_analysis_does_not_change_its_base(corpus_dir):
    graph = resolve("Demo", [corpus_dir])
    demo, prelude = graph.modules["Demo"], graph.modules["Prelude"]
    base_demo = run_simple(sibling_cons, demo)
    base_prelude = run_simple(sibling_cons, prelude)
    before = dict(base_demo)
    info = ProgInfo(base_demo, base_prelude)
    run_simple(pat_comp_analysis, demo, info)
    assert dict(info.local) == before
    eng = Engine([corpus_dir], cache_dir=False)
    assert dict(eng.analyze_generic("SiblingCons", "Demo").local) == before


def test_combined_with_unused_base_equals_plain(corpus_modules):
    plain = func_analysis("Arity", lambda f: f.arity)
    combined = combined_func_analysis("Arity2", sibling_cons, lambda info, f: f.arity)
    m = corpus_modules["Demo"]
    assert run_simple(plain, m) == run_simple(combined, m, ProgInfo({}, {}))
