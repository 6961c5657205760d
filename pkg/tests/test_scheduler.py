from __future__ import annotations

import json
import random
import time

import pytest

from cass.analyses import REGISTRY, nondet_analysis
from cass.builders import call, fun, lit, module, orr
from cass.fixpoint import transfer_calls
from cass.framework import dependency_func_analysis
from cass.ir import write_module
from cass.modules import fingerprints, resolve
from cass.scheduler import EventLog, Job, PoolConfig, WorkerFailure, run_master, worker_step
from cass.synth import wide_application, write_all
from conftest import CORPUS


def _write(d, *mods):
    for m in mods:
        write_module(m, d)
    return d


@pytest.fixture
def diamond(tmp_path):
    return _write(
        tmp_path,
        module("A", ["B", "C"], [], [fun("A.f", [], call("B.f")), fun("A.g", [], call("C.f"))]),
        module("B", ["D"], [], [fun("B.f", [], call("D.f"))]),
        module("C", ["D"], [], [fun("C.f", [], call("D.f"))]),
        module("D", [], [], [fun("D.f", [], orr(lit(0), lit(1)))]),
    )


def _check_safety(events, graph, analysis):
    """No module is dispatched before every one of its imports is done."""
    finished: set[str] = set()
    for e in events.events:
        if e["analysis"] != analysis:
            continue
        if e["event"] == "dispatch":
            assert all(i in finished for i in graph.edges[e["module"]]), e
        elif e["event"] in ("done", "cache_hit"):
            finished.add(e["module"])
    assert finished == set(graph.nodes)


def test_pool_config_validation():
    with pytest.raises(ValueError):
        PoolConfig(workers=0)
    with pytest.raises(ValueError):
        PoolConfig(backend="fibers")


def test_chain_with_one_worker_completes_in_order(tmp_path):
    _write(
        tmp_path,
        module("A", ["B"], [], [fun("A.f", [], call("B.f"))]),
        module("B", ["C"], [], [fun("B.f", [], call("C.f"))]),
        module("C", [], [], [fun("C.f", [], lit(0))]),
    )
    events = EventLog()
    run_master(nondet_analysis, "A", search_path=[tmp_path], events=events)
    assert [e["module"] for e in events.of("done")] == ["C", "B", "A"]


def test_diamond_event_partial_order(diamond):
    g = resolve("A", [diamond])
    for workers in (1, 2):
        events = EventLog()
        res = run_master(nondet_analysis, "A", PoolConfig(workers), [diamond], events=events)
        _check_safety(events, g, "Deterministic")
        done = [e["module"] for e in events.of("done")]
        assert done[0] == "D" and done[-1] == "A" and set(done[1:3]) == {"B", "C"}
        assert res["A"].all_values == {"f": "NonDet", "g": "NonDet"}
        # worker ids are drawn from the pool
        assert {e["worker"] for e in events.of("dispatch")} <= set(range(workers))


def test_two_workers_overlap_on_independent_modules(tmp_path, prelude):
    mods = wide_application(prelude, 6, random.Random(5))
    write_all(mods, tmp_path)
    write_module(prelude, tmp_path)
    events = EventLog()
    run_master(nondet_analysis, "Main", PoolConfig(2), [tmp_path], events=events)
    running, peak = 0, 0
    for e in events.events:
        if e["event"] == "dispatch":
            running += 1
        elif e["event"] == "done":
            running -= 1
        peak = max(peak, running)
    assert peak == 2


def test_head_only_policy(diamond):
    g = resolve("A", [diamond])
    events = EventLog()
    res = run_master(nondet_analysis, "A", PoolConfig(2, head_only=True), [diamond], events=events)
    _check_safety(events, g, "Deterministic")
    # the head of the list must be dispatched first, so dispatches follow the topological order
    assert [e["module"] for e in events.of("dispatch")] == ["D", "B", "C", "A"]
    assert set(res) == set(g.nodes)


def test_rerun_on_full_cache_dispatches_nothing(tmp_path, corpus_dir):
    cache = tmp_path / "cache"
    analysis = REGISTRY.get("Total")
    first = run_master(analysis, "Demo", search_path=[corpus_dir], cache_dir=cache)
    events = EventLog()
    before = transfer_calls.value
    second = run_master(analysis, "Demo", search_path=[corpus_dir], cache_dir=cache, events=events)
    assert transfer_calls.value == before
    assert not events.of("dispatch")
    assert len(events.of("cache_hit")) == 6  # two modules, three passes
    assert {m: e.dumps() for m, e in first.items()} == {m: e.dumps() for m, e in second.items()}


def test_combined_analysis_runs_base_passes_first(corpus_dir):
    events = EventLog()
    run_master(REGISTRY.get("Total"), "Demo", search_path=[corpus_dir], events=events)
    order = [e["analysis"] for e in events.of("dispatch")]
    assert order == ["SiblingCons"] * 2 + ["PatComplete"] * 2 + ["Total"] * 2


def test_worker_step_short_circuits_on_valid_cache(tmp_path, corpus_dir):
    cache = tmp_path / "cache"
    run_master(nondet_analysis, "Prelude", search_path=[corpus_dir], cache_dir=cache)
    g = resolve("Prelude", [corpus_dir])
    fp = fingerprints(g, nondet_analysis)["Prelude"]
    before = transfer_calls.value
    entry = worker_step(Job("Prelude", "Deterministic", g.paths["Prelude"], fp), {}, nondet_analysis, None, cache)
    assert transfer_calls.value == before
    assert entry.fingerprint == fp
    # a registry name works too (process workers)
    assert worker_step(Job("Prelude", "Deterministic", g.paths["Prelude"], fp), {}, "Deterministic", None, cache) == entry


def test_corrupt_ir_surfaces_module_name(tmp_path, corpus_dir):
    for name in ("Prelude", "Demo"):
        (tmp_path / f"{name}.fcy.json").write_bytes((corpus_dir / f"{name}.fcy.json").read_bytes())
    g = resolve("Demo", [tmp_path])
    path = tmp_path / "Demo.fcy.json"
    path.write_bytes(path.read_bytes()[:200])
    with pytest.raises(WorkerFailure) as info:
        run_master(nondet_analysis, "Demo", PoolConfig(2), [tmp_path], graph=g)
    assert info.value.module == "Demo"
    assert "Demo" in str(info.value)


def test_failing_transfer_drains_workers(tmp_path, prelude):
    def boom(f, called):
        if f.qname.module == "Leaf2":
            raise RuntimeError("kaputt")
        return True

    bad = dependency_func_analysis("Boom", True, boom, external_default=True)
    mods = wide_application(prelude, 8, random.Random(9))
    write_all(mods, tmp_path)
    write_module(prelude, tmp_path)
    events = EventLog()
    with pytest.raises(WorkerFailure) as info:
        run_master(bad, "Main", PoolConfig(3), [tmp_path], events=events)
    assert info.value.module == "Leaf2" and "kaputt" in str(info.value)
    assert not any(e["module"] == "Main" for e in events.of("dispatch"))
    assert len(events.of("dispatch")) == len(events.of("done")) + 1


def test_process_backend_matches_threads(tmp_path, corpus_dir):
    a = run_master(REGISTRY.get("Total"), "Demo", PoolConfig(2, "process"), [corpus_dir])
    b = run_master(REGISTRY.get("Total"), "Demo", PoolConfig(1), [corpus_dir])
    assert {m: e.dumps() for m, e in a.items()} == {m: e.dumps() for m, e in b.items()}


def test_process_backend_requires_registered_analyses(corpus_dir):
    adhoc = dependency_func_analysis("Adhoc", True, lambda f, c: True)
    with pytest.raises(Exception, match="registered"):
        run_master(adhoc, "Demo", PoolConfig(2, "process"), [corpus_dir])


def test_event_log_file(tmp_path, corpus_dir):
    log = tmp_path / "events.ndjson"
    events = EventLog(log)
    run_master(nondet_analysis, "Demo", search_path=[corpus_dir], events=events)
    events.close()
    records = [json.loads(line) for line in log.read_text().splitlines()]
    assert records == events.events
    for r in records:
        assert set(r) == {"ts", "event", "module", "analysis", "worker"}
        assert r["event"] in ("dispatch", "done", "cache_hit")


def test_liveness_on_all_fixtures(corpus_dir):
    start = time.monotonic()
    for path in sorted(CORPUS.glob("*.fcy.json")):
        name = path.name.split(".")[0]
        for workers in (1, 3):
            events = EventLog()
            res = run_master(REGISTRY.get("Total"), name, PoolConfig(workers), [corpus_dir], events=events)
            g = resolve(name, [corpus_dir])
            assert set(res) == set(g.nodes)
            _check_safety(events, g, "Total")
    assert time.monotonic() - start < 60
