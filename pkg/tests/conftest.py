from __future__ import annotations

import random
import shutil
from pathlib import Path

import pytest

from cass.analyses import REGISTRY
from cass.api import Engine
from cass.ir import load_module
from cass.synth import application, write_all

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
GOLDEN = Path(__file__).resolve().parent / "golden"

APP_SIZE = 30
APP_SEED = 20240611

# criterion number -> [(nodeid, outcome)]
_criteria: dict[int, list[tuple[str, str]]] = {}
_notes: list[str] = []


def corpus_names() -> list[str]:
    return sorted(p.name[: -len(".fcy.json")] for p in CORPUS.glob("*.fcy.json"))


@pytest.fixture(scope="session")
def corpus_dir() -> Path:
    return CORPUS


@pytest.fixture(scope="session")
def corpus_modules():
    return {n: load_module(CORPUS / f"{n}.fcy.json") for n in corpus_names()}


@pytest.fixture(scope="session")
def corpus_results(corpus_modules, tmp_path_factory):
    """(analysis name, module name) -> ProgInfo for every registered analysis and corpus module."""
    eng = Engine([CORPUS], cache_dir=tmp_path_factory.mktemp("corpus_cache"))
    return {(a.name, m): eng.analyze_generic(a.name, m) for a in REGISTRY for m in corpus_modules}


@pytest.fixture(scope="session")
def prelude():
    return load_module(CORPUS / "Prelude.fcy.json")


def make_app(directory: Path, prelude, n: int = APP_SIZE, seed: int = APP_SEED, **opts) -> str:
    """Write a generated application plus the Prelude into ``directory``; returns the main module."""
    mods = application(prelude, n, random.Random(seed), **opts)
    write_all(mods, directory)
    shutil.copy(CORPUS / "Prelude.fcy.json", directory / "Prelude.fcy.json")
    return mods[-1].name


@pytest.fixture(scope="session")
def app_dir(tmp_path_factory, prelude) -> tuple[Path, str]:
    d = tmp_path_factory.mktemp("app30")
    return d, make_app(d, prelude)


def pytest_configure(config) -> None:
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")
    config.addinivalue_line("markers", "slow: takes more than a few seconds")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        _notes.extend(str(value) for key, value in rep.user_properties if key == "note")
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    n = marker.args[0]
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _criteria.setdefault(n, []).append((item.nodeid, rep.outcome))


def pytest_terminal_summary(terminalreporter) -> None:
    if not _criteria and not _notes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_criteria):
        runs = _criteria[n]
        ok = all(o == "passed" for _, o in runs)
        tr.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} ({len(runs)} check{'s' * (len(runs) != 1)})")
    for note in _notes:
        tr.write_line(f"note: {note}")
